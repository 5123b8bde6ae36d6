#pragma once

#include "cli/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hbe::cli {

// Worker threads: hardware concurrency capped by HBE_THREADS.
unsigned thread_count();

int cmd_build(const RunConfig& cfg, std::ostream& out);
int cmd_query(const RunConfig& cfg, std::ostream& out);
int cmd_bench(const RunConfig& cfg, std::ostream& out);
int cmd_kmvm(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);

// Entry point shared by the executable and the tests; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hbe::cli
