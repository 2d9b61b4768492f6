#pragma once

#include <iosfwd>

namespace cglkit::cli {

/// Runs the command line; returns 0 on success, 2 on usage/config errors and
/// 3 on numerical failures.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cglkit::cli
