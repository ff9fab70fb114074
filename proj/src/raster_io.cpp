#include "cloudnet/raster_io.hpp"

#include "cloudnet/error.hpp"

#include <tiffio.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace cloudnet {

namespace {

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

void silence_libtiff() {
  static const bool once = [] {
    TIFFSetWarningHandler(nullptr);
    TIFFSetErrorHandler(nullptr);
    return true;
  }();
  (void)once;
}

struct TiffInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint16_t bits = 0;
  std::uint16_t format = SAMPLEFORMAT_UINT;
};

TiffHandle open_for_read(const fs::path& path, TiffInfo& info) {
  silence_libtiff();
  if (!fs::exists(path)) throw Error(Errc::DecodeError, "no such file " + path.string());
  TiffHandle tif(TIFFOpen(path.c_str(), "r"));
  if (!tif) throw Error(Errc::DecodeError, "cannot open TIFF " + path.string());

  std::uint16_t spp = 1;
  std::uint16_t planar = PLANARCONFIG_CONTIG;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &info.width);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &info.height);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &info.bits);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &info.format);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
  if (spp != 1) {
    throw Error(Errc::DecodeError, path.string() + " has " + std::to_string(spp) +
                                       " samples per pixel, expected 1");
  }
  if (info.width == 0 || info.height == 0) throw Error(Errc::DecodeError, "empty raster " + path.string());
  return tif;
}

// Reads the raw sample buffer (row-major, tightly packed) for strip or tiled layouts.
std::vector<unsigned char> read_samples(TIFF* tif, const TiffInfo& info, const fs::path& path) {
  const std::size_t bytes_per_sample = info.bits / 8;
  std::vector<unsigned char> out(std::size_t(info.width) * info.height * bytes_per_sample);

  if (TIFFIsTiled(tif)) {
    std::uint32_t tw = 0, th = 0;
    TIFFGetField(tif, TIFFTAG_TILEWIDTH, &tw);
    TIFFGetField(tif, TIFFTAG_TILELENGTH, &th);
    std::vector<unsigned char> tile(TIFFTileSize(tif));
    for (std::uint32_t ty = 0; ty < info.height; ty += th) {
      for (std::uint32_t tx = 0; tx < info.width; tx += tw) {
        if (TIFFReadTile(tif, tile.data(), tx, ty, 0, 0) < 0) {
          throw Error(Errc::DecodeError, "corrupt tile in " + path.string());
        }
        const std::uint32_t rows = std::min(th, info.height - ty);
        const std::uint32_t cols = std::min(tw, info.width - tx);
        for (std::uint32_t r = 0; r < rows; ++r) {
          std::copy_n(tile.data() + std::size_t(r) * tw * bytes_per_sample, cols * bytes_per_sample,
                      out.data() + (std::size_t(ty + r) * info.width + tx) * bytes_per_sample);
        }
      }
    }
  } else {
    std::vector<unsigned char> line(TIFFScanlineSize(tif));
    for (std::uint32_t r = 0; r < info.height; ++r) {
      if (TIFFReadScanline(tif, line.data(), r) < 0) {
        throw Error(Errc::DecodeError, "corrupt scanline in " + path.string());
      }
      std::copy_n(line.data(), std::size_t(info.width) * bytes_per_sample,
                  out.data() + std::size_t(r) * info.width * bytes_per_sample);
    }
  }
  return out;
}

template <typename T>
Raster<T> decode_unsigned(const fs::path& path) {
  TiffInfo info;
  auto tif = open_for_read(path, info);
  if (info.format != SAMPLEFORMAT_UINT || (info.bits != 8 && info.bits != 16)) {
    throw Error(Errc::DecodeError, path.string() + ": expected 8- or 16-bit unsigned samples, got " +
                                       std::to_string(info.bits) + "-bit format " +
                                       std::to_string(info.format));
  }
  const auto bytes = read_samples(tif.get(), info, path);
  Raster<T> out(info.height, info.width);
  const std::size_t n = std::size_t(info.width) * info.height;
  if (info.bits == 8) {
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = static_cast<T>(bytes[i]);
  } else {
    const auto* words = reinterpret_cast<const std::uint16_t*>(bytes.data());
    for (std::size_t i = 0; i < n; ++i) {
      if constexpr (sizeof(T) == 1) {
        // 16-bit masks saturate; zero stays zero.
        out.data()[i] = static_cast<T>(std::min<unsigned>(words[i], 255u));
      } else {
        out.data()[i] = static_cast<T>(words[i]);
      }
    }
  }
  return out;
}

void encode(const fs::path& path, const void* data, std::uint32_t width, std::uint32_t height,
            std::uint16_t bits, std::uint16_t format) {
  silence_libtiff();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  TiffHandle tif(TIFFOpen(path.c_str(), "w"));
  if (!tif) throw Error(Errc::EncodeError, "cannot create " + path.string());
  TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, width);
  TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, height);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, std::uint16_t{1});
  TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, bits);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, format);
  TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
  TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
  TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif.get(), 0));
  const std::size_t row_bytes = std::size_t(width) * bits / 8;
  std::vector<unsigned char> line(row_bytes);
  for (std::uint32_t r = 0; r < height; ++r) {
    std::copy_n(static_cast<const unsigned char*>(data) + r * row_bytes, row_bytes, line.data());
    if (TIFFWriteScanline(tif.get(), line.data(), r, 0) < 0) {
      throw Error(Errc::EncodeError, "write failed for " + path.string());
    }
  }
}

}  // namespace

BandRaster read_band_tiff(const fs::path& path) { return decode_unsigned<std::uint16_t>(path); }

BinaryMask read_mask_tiff(const fs::path& path) { return decode_unsigned<std::uint8_t>(path); }

void write_band_tiff(const fs::path& path, const BandRaster& raster) {
  encode(path, raster.data(), std::uint32_t(raster.cols()), std::uint32_t(raster.rows()), 16,
         SAMPLEFORMAT_UINT);
}

void write_mask_tiff(const fs::path& path, const BinaryMask& raster) {
  encode(path, raster.data(), std::uint32_t(raster.cols()), std::uint32_t(raster.rows()), 8,
         SAMPLEFORMAT_UINT);
}

void write_float_tiff(const fs::path& path, const Raster<float>& raster) {
  encode(path, raster.data(), std::uint32_t(raster.cols()), std::uint32_t(raster.rows()), 32,
         SAMPLEFORMAT_IEEEFP);
}

Raster<float> read_float_tiff(const fs::path& path) {
  TiffInfo info;
  auto tif = open_for_read(path, info);
  if (info.format != SAMPLEFORMAT_IEEEFP || info.bits != 32) {
    throw Error(Errc::DecodeError, path.string() + ": expected 32-bit float samples");
  }
  const auto bytes = read_samples(tif.get(), info, path);
  Raster<float> out(info.height, info.width);
  std::copy_n(reinterpret_cast<const float*>(bytes.data()), out.size(), out.data());
  return out;
}

void validate_scene(const SpectralScene& scene) {
  const Index h = scene.bands[0].rows();
  const Index w = scene.bands[0].cols();
  if (h < 1 || w < 1) throw Error(Errc::DimensionMismatch, "scene " + scene.scene_id + " is empty");
  for (int b = 1; b < kBandCount; ++b) {
    if (scene.bands[b].rows() != h || scene.bands[b].cols() != w) {
      std::ostringstream msg;
      msg << "scene " << scene.scene_id << ": band " << kBandNames[b] << " is "
          << scene.bands[b].rows() << "x" << scene.bands[b].cols() << ", expected " << h << "x" << w;
      throw Error(Errc::DimensionMismatch, msg.str());
    }
  }
}

SpectralScene load_scene(const std::vector<fs::path>& band_paths, std::string scene_id) {
  if (band_paths.size() != kBandCount) {
    throw Error(Errc::MissingBand, "expected 4 band files, got " + std::to_string(band_paths.size()));
  }
  for (int b = 0; b < kBandCount; ++b) {
    if (!fs::exists(band_paths[b])) {
      throw Error(Errc::MissingBand,
                  std::string(kBandNames[b]) + " band file " + band_paths[b].string() + " not found");
    }
  }
  SpectralScene scene;
  scene.scene_id = std::move(scene_id);
  for (int b = 0; b < kBandCount; ++b) scene.bands[b] = read_band_tiff(band_paths[b]);
  validate_scene(scene);
  return scene;
}

void write_scene(const SpectralScene& scene, const std::array<fs::path, kBandCount>& band_paths) {
  validate_scene(scene);
  for (int b = 0; b < kBandCount; ++b) write_band_tiff(band_paths[b], scene.bands[b]);
}

GroundTruthMask load_gt(const fs::path& path, const SpectralScene& scene) {
  BinaryMask raw = read_mask_tiff(path);
  if (raw.rows() != scene.height() || raw.cols() != scene.width()) {
    std::ostringstream msg;
    msg << "ground truth " << path.string() << " is " << raw.rows() << "x" << raw.cols()
        << " but scene " << scene.scene_id << " is " << scene.height() << "x" << scene.width();
    throw Error(Errc::DimensionMismatch, msg.str());
  }
  GroundTruthMask gt;
  gt.scene_id = scene.scene_id;
  gt.mask = (raw.array() != 0).cast<std::uint8_t>();
  return gt;
}

std::string_view split_name(Split s) { return s == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw Error(Errc::ConfigError, "unknown split '" + std::string(name) + "'");
}

fs::path layout_path(const fs::path& root, Split split, std::string_view band, std::string_view id) {
  return root / split_name(split) / band / (std::string(band) + "_" + std::string(id) + ".TIF");
}

namespace {

// Identifier encoded in `<band>_<id>.TIF`, or nullopt for unrelated files.
std::optional<std::string> entry_id(const fs::path& file, std::string_view band) {
  const std::string name = file.filename().string();
  const std::string prefix = std::string(band) + "_";
  const std::string ext = file.extension().string();
  if (ext != ".TIF" && ext != ".tif" && ext != ".TIFF" && ext != ".tiff") return std::nullopt;
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  std::string id = file.stem().string().substr(prefix.size());
  if (id.empty()) return std::nullopt;
  return id;
}

std::map<std::string, fs::path> scan_band_dir(const fs::path& dir, std::string_view band) {
  std::map<std::string, fs::path> found;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    if (auto id = entry_id(item.path(), band)) {
      if (!found.emplace(*id, item.path()).second) {
        throw Error(Errc::LayoutError, "duplicate identifier " + *id + " in " + dir.string());
      }
    }
  }
  return found;
}

}  // namespace

DatasetManifest build_manifest(const fs::path& root, Split split) {
  if (!fs::is_directory(root)) throw Error(Errc::LayoutError, "data root " + root.string() + " is not a directory");
  DatasetManifest manifest;
  manifest.split = split;
  const fs::path split_dir = root / split_name(split);
  if (!fs::is_directory(split_dir) || fs::is_empty(split_dir)) return manifest;

  std::array<std::map<std::string, fs::path>, kBandCount> bands;
  for (int b = 0; b < kBandCount; ++b) {
    const fs::path dir = split_dir / kBandNames[b];
    if (!fs::is_directory(dir)) throw Error(Errc::LayoutError, "band directory " + dir.string() + " missing");
    bands[b] = scan_band_dir(dir, kBandNames[b]);
  }
  std::map<std::string, fs::path> gts;
  if (fs::is_directory(split_dir / kGtName)) gts = scan_band_dir(split_dir / kGtName, kGtName);

  std::set<std::string> ids;
  for (const auto& band : bands) {
    for (const auto& [id, path] : band) ids.insert(id);
  }
  for (const auto& id : ids) {
    ManifestEntry entry;
    entry.scene_id = id;
    for (int b = 0; b < kBandCount; ++b) {
      auto it = bands[b].find(id);
      if (it == bands[b].end()) {
        throw Error(Errc::MissingBand, "scene " + id + " has no " + std::string(kBandNames[b]) + " file");
      }
      entry.bands[b] = it->second;
    }
    if (auto it = gts.find(id); it != gts.end()) entry.gt = it->second;
    if (split == Split::Train && !entry.gt) {
      throw Error(Errc::MissingGT, "training scene " + id + " has no ground truth in " +
                                       (split_dir / kGtName).string());
    }
    manifest.entries.push_back(std::move(entry));
  }
  manifest.patch_count = manifest.entries.size();
  return manifest;
}

void write_manifest_csv(const fs::path& path, const DatasetManifest& manifest) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "scene_id,blue,green,red,nir,gt\n";
  for (const auto& e : manifest.entries) {
    out << e.scene_id;
    for (const auto& b : e.bands) out << ',' << b.string();
    out << ',' << (e.gt ? e.gt->string() : std::string()) << '\n';
  }
}

DatasetManifest read_manifest_csv(const fs::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::LayoutError, "cannot read manifest " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "scene_id,blue,green,red,nir,gt") {
    throw Error(Errc::LayoutError, "unexpected manifest header in " + path.string());
  }
  DatasetManifest manifest;
  manifest.split = split;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) throw Error(Errc::LayoutError, "malformed manifest row: " + line);
    if (!seen.insert(cells[0]).second) throw Error(Errc::LayoutError, "duplicate scene_id " + cells[0]);
    ManifestEntry e;
    e.scene_id = cells[0];
    for (int b = 0; b < kBandCount; ++b) e.bands[b] = cells[1 + b];
    if (!cells[5].empty()) e.gt = fs::path(cells[5]);
    if (split == Split::Train && !e.gt) throw Error(Errc::MissingGT, "training scene " + e.scene_id + " has no ground truth");
    manifest.entries.push_back(std::move(e));
  }
  manifest.patch_count = manifest.entries.size();
  return manifest;
}

}  // namespace cloudnet
