// Writes the synthetic training fixture used by the acceptance suite.
#include "cloudnet/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic 4-band dataset with rectangular clouds"};
  std::string root;
  int count = 8;
  long side = 64;
  std::uint64_t seed = 2019;
  std::string split = "train";
  app.add_option("root", root, "Output data root")->required();
  app.add_option("--count", count, "Number of scenes")->capture_default_str();
  app.add_option("--side", side, "Scene side in pixels")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  app.add_option("--split", split, "train or test")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    cloudnet::write_synthetic_dataset(root, cloudnet::parse_split(split), count, side, side, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
