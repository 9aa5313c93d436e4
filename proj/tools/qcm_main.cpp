#include <iostream>
#include <string>
#include <vector>

#include "qcm_app.hpp"

int main(int argc, char** argv) {
  return qcm::app::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
