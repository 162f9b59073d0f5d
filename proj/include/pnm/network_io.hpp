#pragma once

#include <filesystem>
#include <iosfwd>

#include "pnm/network.hpp"

namespace pnm {

// Plain-text graph format:
//   # pnm-network format 1
//   pores <N>
//   <id> <x> <y> <z> <r> <tag> [tag values...]
//   throats <M>
//   <id> <i> <j> <r> <L> <p_ce>
// Tags: interior | flux_inlet <kg/s> | pressure_inlet_capillary <p_w> <p_ce> | pressure_outlet <p_w>.
void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);

void write_network_file(const std::filesystem::path& path, const Network& net);
Network read_network_file(const std::filesystem::path& path);

}  // namespace pnm
