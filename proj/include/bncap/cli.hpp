// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bncap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `capgen` subcommand. `args` excludes the program name. Results go
/// to `out`, diagnostics to `err`. Every flag may also come from the
/// environment as CAPGEN_<FLAG>, below the command line in precedence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace bncap::cli
