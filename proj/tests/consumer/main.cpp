#include <iostream>

#include "secmt/sideconstraints.hpp"
#include "secmt/topics.hpp"

int main() {
  const secmt::topics::LdaConfig config;
  std::cout << secmt::sideconstraints::topic_tag(config.topics) << '\n';
  return config.topics == 100 ? 0 : 1;
}
