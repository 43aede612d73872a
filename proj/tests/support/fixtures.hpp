#pragma once

#include <memory>
#include <string>

#include "etadm/rulebook.hpp"
#include "etadm/state.hpp"

namespace fixtures {

inline const std::string kData = ETADM_DATA_DIR;
inline const std::string kTestData = ETADM_TEST_DATA_DIR;

inline std::shared_ptr<const etadm::Rulebook> rulebook() {
  static const auto rb = std::make_shared<const etadm::Rulebook>(
      etadm::Rulebook::load(kData + "/restaurant_rulebook.json"));
  return rb;
}

inline std::shared_ptr<const etadm::DomainDb> db() {
  static const auto d = std::make_shared<const etadm::DomainDb>(etadm::DomainDb::load(kData + "/restaurants.json"));
  return d;
}

inline std::shared_ptr<const etadm::Rulebook> test_rulebook(const std::string& file) {
  return std::make_shared<const etadm::Rulebook>(etadm::Rulebook::load(kTestData + "/" + file));
}

// Name -> id in the bundled rulebook.
inline int action_id(const std::string& name) { return *rulebook()->find_action(name); }

}  // namespace fixtures
