// SPDX-License-Identifier: Apache-2.0
#ifndef GRIDSURE_GRID_IO_HPP
#define GRIDSURE_GRID_IO_HPP

#include <string>

#include "gridsure/grid/model.hpp"

namespace gridsure::grid {

/// Load and validate a network config file (see docs/schema.md).
/// Throws ParseError on malformed input and ValidationError on structural
/// problems; both name the offending entity.
NetworkModel load_network(const std::string& path);

/// Parse from an in-memory JSON document. `base_dir` resolves relative
/// price-CSV references.
NetworkModel parse_network(const std::string& json_text,
                           const std::string& base_dir = "");

/// Canonical serialization (profiles inlined). parse(network_to_json(m))
/// reproduces m field for field.
std::string network_to_json(const NetworkModel& model);

}  // namespace gridsure::grid

#endif  // GRIDSURE_GRID_IO_HPP
