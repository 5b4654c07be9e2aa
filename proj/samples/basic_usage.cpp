// Trains a small model on the bundled corpus, measures a query's information
// mass, and samples a continuation at the mass-adapted temperature.
//
//   sample_basic_usage [corpus.txt] ["query text"]

#include <fstream>
#include <iostream>
#include <string>

#include "infograv.hpp"

int main(int argc, char** argv) {
  const std::string corpus_path = argc > 1 ? argv[1] : INFOGRAV_SAMPLE_CORPUS;
  const std::string query_text = argc > 2 ? argv[2] : "the river carries";

  std::ifstream in(corpus_path);
  if (!in) {
    std::cerr << "cannot open " << corpus_path << "\n";
    return 3;
  }
  const auto model = infograv::train(in, 3, 0.75);
  const auto query = model.encode(query_text);

  const auto mass = infograv::compute_mass(model, query);
  std::cout << "H=" << mass.entropy_H << " D=" << mass.depth_D << " N=" << mass.novelty_N
            << " M=" << mass.mass_M << "\n";

  const auto temp = infograv::adaptive_temperature(mass.mass_M);
  const auto traj = infograv::generate(model, query, temp, 12, 7);
  std::cout << "T=" << temp.value() << " action=" << traj.action << "\n"
            << query_text << " | " << infograv::join_tokens(model.vocab().decode(traj.tokens)) << "\n";

  const auto field = infograv::potential(model.next_dist(query));
  std::cout << "most attracted token: " << model.vocab().surface(infograv::argmin(field.phi())) << "\n";
  return 0;
}
