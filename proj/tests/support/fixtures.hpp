#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "phasemap/exact.hpp"

namespace testing_support {

inline phasemap::OracleFixtureFile load_oracle_fixtures() {
  std::ifstream in(std::string(PHASEMAP_FIXTURE_DIR) + "/oracle.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return phasemap::fixtures_from_text(ss.str());
}

}  // namespace testing_support
