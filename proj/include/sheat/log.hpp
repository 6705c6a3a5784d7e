#pragma once

#include <spdlog/spdlog.h>

#include <memory>

namespace sheat {

// Shared stderr logger; level defaults to warn.
spdlog::logger& log();
void set_verbosity(int level);

}  // namespace sheat
