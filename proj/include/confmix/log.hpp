#pragma once

namespace confmix {

/// Reads CONFMIX_LOG (trace|debug|info|warn|error|off) and configures the stderr logger.
void init_logging();

} // namespace confmix
