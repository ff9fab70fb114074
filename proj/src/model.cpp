#include "cloudnet/model.hpp"

namespace cloudnet {

void NetworkConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::ConfigError, msg); };
  if (input_channels < 1) fail("input_channels must be positive");
  if (output_channels != 1) fail("only single-channel output is supported");
  if (kernel_size < 1 || kernel_size % 2 == 0) fail("kernel_size must be odd");
  if (depth_schedule.empty()) fail("depth_schedule must have at least one level");
  if (depth_schedule.front() < input_channels || depth_schedule.front() % input_channels != 0) {
    fail("first depth " + std::to_string(depth_schedule.front()) + " is not a multiple of input_channels " +
         std::to_string(input_channels));
  }
  for (std::size_t i = 1; i < depth_schedule.size(); ++i) {
    if (depth_schedule[i] != 2 * depth_schedule[i - 1]) {
      fail("depth " + std::to_string(depth_schedule[i]) + " at level " + std::to_string(i) + " is not double " +
           std::to_string(depth_schedule[i - 1]));
    }
  }
  if (bottleneck_depth != 2 * depth_schedule.back()) {
    fail("bottleneck_depth must be " + std::to_string(2 * depth_schedule.back()));
  }
  if (levels() >= 62) fail("too many levels");
  const Index factor = Index(1) << levels();
  if (input_side < 1 || input_side % factor != 0) {
    fail("input_side " + std::to_string(input_side) + " is not divisible by 2^" + std::to_string(levels()));
  }
}

NetworkConfig make_config(Index levels, Index input_side, Index first_depth) {
  NetworkConfig c;
  c.input_side = input_side;
  c.depth_schedule.clear();
  for (Index i = 0; i < levels; ++i) c.depth_schedule.push_back(first_depth << i);
  c.bottleneck_depth = first_depth << levels;
  return c;
}

}  // namespace cloudnet
