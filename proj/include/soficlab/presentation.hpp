#pragma once

#include <string>

#include "soficlab/relation.hpp"

namespace soficlab {

// A relation plus its named generators, as read from a presentation file.
struct Presentation {
  FinRelation relation;
  GeneratorSet generators;
};

// Presentation files are JSON:
//   {
//     "weights": ["1/2", "1/2"],
//     "classes": [[0, 1]],
//     "generators": {"s": {"1": 0}}
//   }
// Point indices are zero-based; generator maps use point indices as keys and
// target indices as values. serialize_presentation emits the canonical form
// (sorted keys, two-space indent); parsing it back is bit-exact.
Presentation parse_presentation(const std::string& text);
Presentation load_presentation(const std::string& path);
std::string serialize_presentation(const FinRelation& R, const GeneratorSet& F);

}  // namespace soficlab
