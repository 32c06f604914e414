#pragma once

#include <string>

#include "mcbn/network.hpp"

namespace mcbn {

// Hex encoding of the IEEE-754 bit pattern; round-trips every double
// bit-exactly (including -0.0 and non-finite values).
std::string double_to_hex(double v);
double hex_to_double(const std::string& s);

// Versioned JSON document: architecture, parameters, population statistics,
// epsilon. All reals stored hex-encoded.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& json_text);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace mcbn
