#pragma once

namespace mgpi::cli {

/// Full command-line surface. Exit codes: 0 success, 1 usage error,
/// 2 data error, 3 check failure.
int run(int argc, const char* const* argv);

}  // namespace mgpi::cli
