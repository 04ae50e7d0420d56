#include "j3s/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "j3s/error.hpp"

namespace j3s {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFmxHeader = 12;

std::uint32_t read_u32_le(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint64_t read_u64_le(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(SampleKind kind) noexcept {
  return kind == SampleKind::ImageSet ? "image_set" : "feature_map";
}

SampleKind parse_sample_kind(const std::string& s) {
  if (s == "image_set") return SampleKind::ImageSet;
  if (s == "feature_map") return SampleKind::FeatureMap;
  throw Error(ErrorCode::FormatError, "unknown sample kind '" + s + "'");
}

std::size_t Manifest::sample_count() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c.samples.size();
  return n;
}

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir, bool check_paths) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("manifest: ") + e.what());
  }
  Manifest manifest;
  std::set<ClassId> class_ids;
  std::set<std::string> sample_ids;
  try {
    for (const auto& jc : doc.at("classes")) {
      ClassRecord rec;
      rec.id = jc.at("id").get<ClassId>();
      rec.name = jc.value("name", std::to_string(rec.id));
      if (!class_ids.insert(rec.id).second) {
        throw Error(ErrorCode::FormatError, "duplicate class id " + std::to_string(rec.id));
      }
      for (const auto& js : jc.at("samples")) {
        SampleEntry s;
        s.sample_id = js.at("id").get<std::string>();
        fs::path p = js.at("path").get<std::string>();
        s.path = p.is_absolute() ? p : base_dir / p;
        s.kind = parse_sample_kind(js.value("kind", std::string("image_set")));
        if (js.contains("frame_height")) s.frame_height = js.at("frame_height").get<int>();
        if (!sample_ids.insert(s.sample_id).second) {
          throw Error(ErrorCode::FormatError, "duplicate sample id '" + s.sample_id + "'");
        }
        if (check_paths && !fs::exists(s.path)) {
          throw Error(ErrorCode::IoError,
                      "sample '" + s.sample_id + "' path '" + s.path.string() + "' not found");
        }
        rec.samples.push_back(std::move(s));
      }
      manifest.classes.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("manifest: ") + e.what());
  }
  return manifest;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  const fs::path base = path.parent_path();
  nlohmann::json doc;
  doc["classes"] = nlohmann::json::array();
  for (const auto& c : manifest.classes) {
    nlohmann::json jc;
    jc["id"] = c.id;
    jc["name"] = c.name;
    jc["samples"] = nlohmann::json::array();
    for (const auto& s : c.samples) {
      nlohmann::json js;
      js["id"] = s.sample_id;
      const fs::path p = fs::absolute(s.path).lexically_normal().lexically_relative(
          fs::absolute(base).lexically_normal());
      js["path"] = p.generic_string();
      js["kind"] = to_string(s.kind);
      if (s.frame_height) js["frame_height"] = *s.frame_height;
      jc["samples"].push_back(std::move(js));
    }
    doc["classes"].push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

Eigen::MatrixXd parse_fmx1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFmxHeader) {
    throw Error(ErrorCode::FormatError, "FMX1 header truncated at byte offset " +
                                            std::to_string(bytes.size()));
  }
  if (!(bytes[0] == 'F' && bytes[1] == 'M' && bytes[2] == 'X' && bytes[3] == '1')) {
    throw Error(ErrorCode::FormatError, "bad FMX1 magic at byte offset 0");
  }
  const std::uint32_t d = read_u32_le(bytes, 4);
  const std::uint32_t m = read_u32_le(bytes, 8);
  if (d == 0 || m == 0) {
    throw Error(ErrorCode::FormatError, "FMX1 shape " + std::to_string(d) + "x" +
                                            std::to_string(m) + " at byte offset 4 is empty");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(d) * m;
  const std::uint64_t expected = kFmxHeader + 8 * count;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::FormatError,
                "FMX1 payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected) + " (mismatch at byte offset " +
                    std::to_string(std::min<std::uint64_t>(bytes.size(), expected)) + ")");
  }
  Eigen::MatrixXd out(d, m);
  double* data = out.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    const double v = std::bit_cast<double>(read_u64_le(bytes, kFmxHeader + 8 * i));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidValue, "non-finite value at byte offset " +
                                               std::to_string(kFmxHeader + 8 * i));
    }
    data[i] = v;
  }
  return out;
}

std::vector<std::uint8_t> encode_fmx1(const Eigen::MatrixXd& m) {
  std::vector<std::uint8_t> out{'F', 'M', 'X', '1'};
  out.reserve(kFmxHeader + 8 * static_cast<std::size_t>(m.size()));
  put_u32_le(out, static_cast<std::uint32_t>(m.rows()));
  put_u32_le(out, static_cast<std::uint32_t>(m.cols()));
  const double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) put_u64_le(out, std::bit_cast<std::uint64_t>(data[i]));
  return out;
}

void write_fmx1(const fs::path& path, const Eigen::MatrixXd& m) {
  const auto bytes = encode_fmx1(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Eigen::MatrixXd parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = trim(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::FormatError, "CSV cell '" + cell + "' near byte offset " +
                                                std::to_string(line_start + pos) + " is not a number");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidValue, "CSV value near byte offset " +
                                                 std::to_string(line_start + pos) + " is not finite");
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::FormatError, "CSV row at byte offset " + std::to_string(line_start) +
                                              " has " + std::to_string(row.size()) +
                                              " columns, expected " +
                                              std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::FormatError, "CSV matrix is empty");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Eigen::MatrixXd load_matrix(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() >= 4 && bytes[0] == 'F' && bytes[1] == 'M' && bytes[2] == 'X' && bytes[3] == '1') {
    return parse_fmx1(bytes);
  }
  return parse_csv_matrix(std::string(bytes.begin(), bytes.end()));
}

FeatureMatrix load_feature_matrix(const fs::path& path, ClassId label, std::string sample_id) {
  FeatureMatrix x;
  x.data = load_matrix(path);
  x.label = label;
  x.sample_id = sample_id.empty() ? path.stem().string() : std::move(sample_id);
  return x;
}

FeatureMatrix load_sample(const LabeledSample& s) {
  return load_feature_matrix(s.entry.path, s.label, s.entry.sample_id);
}

std::mt19937_64 keyed_stream(std::uint64_t seed, std::uint64_t key) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ key));
}

std::uint64_t hash_key(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Split gallery_probe_split(const Manifest& manifest, const SplitSpec& spec) {
  Split split;
  std::vector<const ClassRecord*> ordered;
  for (const auto& c : manifest.classes) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClassRecord* a, const ClassRecord* b) { return a->id < b->id; });

  for (const ClassRecord* c : ordered) {
    const auto n = static_cast<int>(c->samples.size());
    if (n < 2) {
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c->id) + " has " +
                                             std::to_string(n) + " samples, need >= 2");
    }
    const int g = spec.gallery_per_class ? *spec.gallery_per_class : (n + 1) / 2;
    if (g < 1) throw Error(ErrorCode::InvalidConfig, "gallery_per_class must be >= 1");
    if (g >= n) {
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c->id) + " has " +
                                             std::to_string(n) + " samples, too few for " +
                                             std::to_string(g) + " gallery plus a probe");
    }
    std::vector<std::size_t> order(c->samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto rng = keyed_stream(spec.seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(c->id)));
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < n; ++i) {
      LabeledSample s{c->samples[order[static_cast<std::size_t>(i)]], c->id};
      (i < g ? split.gallery : split.probe).push_back(std::move(s));
    }
  }
  if (spec.few_shot_k) split.gallery = few_shot_subsample(split.gallery, *spec.few_shot_k, spec.seed);
  return split;
}

std::vector<LabeledSample> few_shot_subsample(const std::vector<LabeledSample>& gallery, int k,
                                              std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "few-shot k must be >= 1");
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < gallery.size(); ++i) by_class[gallery[i].label].push_back(i);

  std::vector<bool> keep(gallery.size(), false);
  for (auto& [id, idx] : by_class) {
    if (static_cast<int>(idx.size()) < k) {
      throw Error(ErrorCode::InvalidConfig, "class " + std::to_string(id) + " has " +
                                                std::to_string(idx.size()) +
                                                " gallery samples, fewer than k = " + std::to_string(k));
    }
    // Distinct key space from the split stream.
    auto rng = keyed_stream(seed ^ 0x5f3759df5f3759dfULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(id)));
    std::vector<std::size_t> chosen = idx;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    for (int i = 0; i < k; ++i) keep[chosen[static_cast<std::size_t>(i)]] = true;
  }
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (keep[i]) out.push_back(gallery[i]);
  }
  return out;
}

FeatureMatrix add_gaussian_noise(const FeatureMatrix& x, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  FeatureMatrix out = x;
  if (spec.sigma > 0.0) {
    auto rng = keyed_stream(spec.seed, hash_key(x.sample_id));
    std::normal_distribution<double> normal(0.0, spec.sigma);
    double* data = out.data.data();
    for (Eigen::Index i = 0; i < out.data.size(); ++i) data[i] += normal(rng);
  }
  if (spec.value_range) {
    out.data = out.data.cwiseMax(spec.value_range->first).cwiseMin(spec.value_range->second);
  }
  return out;
}

}  // namespace j3s
