#pragma once

#include <string>
#include <vector>

#include "dwmap/model.hpp"
#include "dwmap/side_constraints.hpp"
#include "dwmap/uai.hpp"

namespace dwmap {

struct ModelFile {
  Graph graph;
  std::vector<SideConstraint> constraints;
};

// Native model format: a token-based text mirror of the Graph fields plus an
// optional side-constraints section (UAI has no constraint syntax). Numbers
// round-trip exactly.
ModelFile parse_model(const std::string& text);
std::string write_model(const ModelFile& model);

// Reads a model file, sniffing the format from the first token
// ("dwmap-model" or "MARKOV").
ModelFile load_model(const std::string& path, const UaiOptions& uai_opts = {});

}  // namespace dwmap
