#pragma once

#include <iosfwd>
#include <string>

namespace geophase {

// Exit codes: 0 ok, 2 config parse error, 3 integration failure,
// 4 residual breach, 5 scenario incompatible with a phase pipeline.
int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& format, std::ostream& log);
int cmd_phases(const std::string& config_path, const std::string& out_path, std::ostream& log);
int cmd_validate(unsigned seed, std::ostream& log);

}  // namespace geophase
