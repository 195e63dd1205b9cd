// Minimal external student for tests: turns right forever and reports the
// RM state it was given as its value hint.
#include <iostream>
#include <string>

#include "json.hpp"

int main() {
  std::string line;
  while (std::getline(std::cin, line)) {
    auto request = nlohmann::json::parse(line);
    nlohmann::json reply = nlohmann::json::object();
    if (request.at("type") == "step") {
      reply["action"] = "turn_right";
      reply["value"] = request.at("rm_state").get<int>() == 0 ? 0.25 : 2.0;
    }
    std::cout << reply.dump() << '\n' << std::flush;
  }
}
