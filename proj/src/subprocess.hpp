#pragma once

#include <string>
#include <string_view>

namespace wombat::detail {

/// Runs `/bin/sh -c command`, writes `input` to its stdin, closes it and
/// returns everything written to stdout. Throws PipelineError when the
/// process cannot be started or exits non-zero.
std::string run_filter_process(const std::string& command, std::string_view input);

} // namespace wombat::detail
