#include "cloudnet/checkpoint.hpp"

#include "cloudnet/config.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace cloudnet {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'C', 'L', 'D', 'N', 'E', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint payload is little-endian");

json tensor_header(const StoredTensor& t) { return {{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}}; }

StoredTensor tensor_from_header(const json& j) {
  return {j.at("name").get<std::string>(), j.at("rows").get<Index>(), j.at("cols").get<Index>(), {}};
}

void write_values(std::ofstream& out, const std::vector<StoredTensor>& ts) {
  for (const auto& t : ts) {
    out.write(reinterpret_cast<const char*>(t.values.data()), std::streamsize(t.values.size() * sizeof(double)));
  }
}

void read_values(std::ifstream& in, std::vector<StoredTensor>& ts, const std::filesystem::path& path) {
  for (auto& t : ts) {
    if (t.rows < 0 || t.cols < 0) throw Error(Errc::DecodeError, "negative tensor shape in " + path.string());
    t.values.resize(std::size_t(t.rows * t.cols));
    in.read(reinterpret_cast<char*>(t.values.data()), std::streamsize(t.values.size() * sizeof(double)));
    if (!in) throw Error(Errc::DecodeError, "truncated checkpoint " + path.string());
  }
}

}  // namespace

void write_checkpoint_file(const std::filesystem::path& path, const StoredCheckpoint& ckpt) {
  json header;
  header["format"] = "cloudnet-checkpoint";
  header["version"] = 1;
  header["config"] = json::parse(network_config_json(ckpt.config));
  header["params"] = json::array();
  for (const auto& t : ckpt.params) header["params"].push_back(tensor_header(t));
  if (ckpt.optimizer) {
    const auto& o = *ckpt.optimizer;
    json opt;
    opt["adam_step"] = o.adam_step;
    opt["moments"] = !o.first_moment.empty();
    opt["lr"] = {{"current_lr", o.lr.current_lr},
                 {"epochs_since_improvement", o.lr.epochs_since_improvement},
                 {"best", std::isfinite(o.lr.best) ? json(o.lr.best) : json(nullptr)}};
    opt["epoch"] = o.epoch;
    opt["history"] = json::array();
    for (const auto& r : o.history) opt["history"].push_back({r.epoch, r.loss, r.lr});
    header["optimizer"] = std::move(opt);
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write checkpoint " + path.string());
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), std::streamsize(text.size()));
  write_values(out, ckpt.params);
  if (ckpt.optimizer) {
    write_values(out, ckpt.optimizer->first_moment);
    write_values(out, ckpt.optimizer->second_moment);
  }
  if (!out) throw Error(Errc::IoError, "failed writing checkpoint " + path.string());
}

StoredCheckpoint read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::DecodeError, "cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  std::uint64_t len = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || magic != kMagic || len > (std::uint64_t(1) << 30)) {
    throw Error(Errc::DecodeError, path.string() + " is not a checkpoint file");
  }
  std::string text(len, '\0');
  in.read(text.data(), std::streamsize(len));
  if (!in) throw Error(Errc::DecodeError, "truncated checkpoint header in " + path.string());

  StoredCheckpoint ckpt;
  try {
    const json header = json::parse(text);
    ckpt.config = parse_network_config(header.at("config").dump());
    for (const auto& t : header.at("params")) ckpt.params.push_back(tensor_from_header(t));
    read_values(in, ckpt.params, path);
    if (header.contains("optimizer")) {
      const auto& o = header.at("optimizer");
      StoredOptimizer opt;
      opt.adam_step = o.at("adam_step").get<std::uint64_t>();
      const auto& lr = o.at("lr");
      opt.lr.current_lr = lr.at("current_lr").get<double>();
      opt.lr.epochs_since_improvement = lr.at("epochs_since_improvement").get<int>();
      opt.lr.best = lr.at("best").is_null() ? std::numeric_limits<double>::infinity() : lr.at("best").get<double>();
      opt.epoch = o.at("epoch").get<int>();
      for (const auto& r : o.at("history")) opt.history.push_back({r.at(0).get<int>(), r.at(1).get<double>(), r.at(2).get<double>()});
      if (o.at("moments").get<bool>()) {
        opt.first_moment = ckpt.params;
        opt.second_moment = ckpt.params;
        read_values(in, opt.first_moment, path);
        read_values(in, opt.second_moment, path);
      }
      ckpt.optimizer = std::move(opt);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::DecodeError, "bad checkpoint header in " + path.string() + ": " + e.what());
  }
  return ckpt;
}

}  // namespace cloudnet
