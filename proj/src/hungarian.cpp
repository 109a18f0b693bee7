#include <limits>
#include <vector>

#include "confmix/align.hpp"
#include "confmix/error.hpp"

namespace confmix {

namespace {

/// Shortest augmenting path with potentials; requires rows <= cols.
/// Returns the column assigned to each row of a minimum-cost matching.
std::vector<std::ptrdiff_t> min_cost_rows(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    const auto m = static_cast<std::size_t>(cost.cols());
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based helper arrays; index 0 is the virtual source
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::vector<double> min_v(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = owner[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < min_v[j]) {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if (min_v[j] < delta) {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::ptrdiff_t> row_to_col(n, -1);
    for (std::size_t j = 1; j <= m; ++j) {
        if (owner[j] != 0) row_to_col[owner[j] - 1] = static_cast<std::ptrdiff_t>(j - 1);
    }
    return row_to_col;
}

} // namespace

Assignment max_assignment(const Eigen::MatrixXd& profit) {
    if (profit.rows() == 0 || profit.cols() == 0) throw DataError("assignment needs a non-empty profit matrix");
    if (!profit.allFinite()) throw NumericalError("assignment profit matrix has non-finite entries");

    Assignment out;
    out.row_to_col.assign(static_cast<std::size_t>(profit.rows()), -1);
    if (profit.rows() <= profit.cols()) {
        out.row_to_col = min_cost_rows(-profit);
    } else {
        const auto col_to_row = min_cost_rows(-profit.transpose());
        for (std::size_t c = 0; c < col_to_row.size(); ++c) {
            if (col_to_row[c] >= 0) out.row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<std::ptrdiff_t>(c);
        }
    }
    for (std::size_t r = 0; r < out.row_to_col.size(); ++r) {
        if (out.row_to_col[r] >= 0) out.value += profit(static_cast<Eigen::Index>(r), out.row_to_col[r]);
    }
    return out;
}

} // namespace confmix
