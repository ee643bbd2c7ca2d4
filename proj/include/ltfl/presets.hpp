#pragma once

#include <string>
#include <vector>

namespace ltfl {

// Canned matrix configs for the standard experiment grids.  The embedded
// JSON is the source of truth; the copies under presets/ are written by
// `ltfl presets --write` and checked for drift in the tests.
struct Preset {
  std::string name;
  std::string description;
  std::string json_text;
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace ltfl
