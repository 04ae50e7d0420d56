#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "j3s/dataset.hpp"
#include "j3s/error.hpp"

using namespace j3s;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> le32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
}

std::vector<std::uint8_t> handmade_fmx(std::uint32_t d, std::uint32_t m, const std::vector<double>& values) {
  std::vector<std::uint8_t> out{'F', 'M', 'X', '1'};
  for (auto v : {d, m}) {
    const auto b = le32(v);
    out.insert(out.end(), b.begin(), b.end());
  }
  for (double x : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

Manifest synthetic_manifest(int classes, int per_class) {
  Manifest m;
  for (int c = 0; c < classes; ++c) {
    ClassRecord r;
    r.id = c * 3;  // ids need not be contiguous
    r.name = "class" + std::to_string(c);
    for (int i = 0; i < per_class; ++i) {
      r.samples.push_back(SampleEntry{"c" + std::to_string(c) + "_" + std::to_string(i), "x.fmx",
                                      SampleKind::FeatureMap, std::nullopt});
    }
    m.classes.push_back(r);
  }
  return m;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("j3s_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("FMX1 decodes a handmade buffer column-major") {
  const auto bytes = handmade_fmx(2, 3, {1, 2, 3, 4, 5, 6});
  const Eigen::MatrixXd m = parse_fmx1(bytes);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  CHECK(m(0, 0) == 1);
  CHECK(m(1, 0) == 2);
  CHECK(m(0, 2) == 5);
  CHECK(m(1, 2) == 6);
  CHECK(encode_fmx1(m) == bytes);
}

TEST_CASE("FMX1 round trip is bit-exact") {
  Eigen::MatrixXd m(3, 4);
  m << 0.1, -0.0, 1e-308, 3.141592653589793, 1e300, -2.5, 7, 1.0 / 3.0, 5e-324, 42, -1e-5, 0.7;
  const Eigen::MatrixXd back = parse_fmx1(encode_fmx1(m));
  CHECK(std::memcmp(back.data(), m.data(), sizeof(double) * 12) == 0);
}

TEST_CASE("FMX1 rejects malformed input") {
  auto bytes = handmade_fmx(2, 3, {1, 2, 3, 4, 5, 6});
  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  CHECK(code_of([&] { parse_fmx1(truncated); }) == ErrorCode::FormatError);
  auto bad_magic = bytes;
  bad_magic[3] = '2';
  CHECK(code_of([&] { parse_fmx1(bad_magic); }) == ErrorCode::FormatError);
  std::vector<std::uint8_t> short_header{'F', 'M', 'X'};
  CHECK(code_of([&] { parse_fmx1(short_header); }) == ErrorCode::FormatError);
  const auto nan = handmade_fmx(1, 2, {1.0, std::nan("")});
  CHECK(code_of([&] { parse_fmx1(nan); }) == ErrorCode::InvalidValue);
  try {
    parse_fmx1(truncated);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
}

TEST_CASE("CSV matrices") {
  const Eigen::MatrixXd m = parse_csv_matrix("1,2\n3,4\n");
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 1);
  CHECK(m(0, 1) == 2);
  CHECK(m(1, 0) == 3);
  CHECK(m(1, 1) == 4);
  CHECK(parse_csv_matrix("1.5,-2e3").cols() == 2);
  CHECK(code_of([] { parse_csv_matrix("1,2\n3\n"); }) == ErrorCode::FormatError);
  CHECK(code_of([] { parse_csv_matrix("1,abc\n"); }) == ErrorCode::FormatError);
}

TEST_CASE("load_matrix sniffs the format") {
  const fs::path dir = temp_dir("sniff");
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  write_fmx1(dir / "a.bin", m);
  std::ofstream(dir / "b.txt") << "1,2\n3,4\n";
  CHECK(load_matrix(dir / "a.bin") == m);
  CHECK(load_matrix(dir / "b.txt") == m);
  CHECK(code_of([&] { load_matrix(dir / "missing"); }) == ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST_CASE("manifest parsing and round trip") {
  const fs::path dir = temp_dir("manifest");
  write_fmx1(dir / "s.fmx", Eigen::MatrixXd::Ones(2, 3));
  const std::string text = R"({"classes":[{"id":1,"name":"a","samples":[
      {"id":"x","path":"s.fmx","kind":"feature_map"},
      {"id":"y","path":"s.fmx","kind":"image_set","frame_height":4}]}]})";
  const Manifest m = parse_manifest(text, dir);
  REQUIRE(m.classes.size() == 1);
  CHECK(m.sample_count() == 2);
  CHECK(m.classes[0].samples[0].kind == SampleKind::FeatureMap);
  CHECK(m.classes[0].samples[1].frame_height == 4);
  CHECK(m.classes[0].samples[0].path == dir / "s.fmx");

  save_manifest(dir / "copy.json", m);
  const Manifest back = load_manifest(dir / "copy.json");
  CHECK(back.classes[0].samples[1].path.lexically_normal() == (dir / "s.fmx").lexically_normal());

  CHECK(code_of([&] { parse_manifest("{not json", dir); }) == ErrorCode::FormatError);
  CHECK(code_of([&] {
          parse_manifest(R"({"classes":[{"id":1,"samples":[{"id":"x","path":"s.fmx"},{"id":"x","path":"s.fmx"}]}]})",
                         dir);
        }) == ErrorCode::FormatError);
  CHECK(code_of([&] {
          parse_manifest(R"({"classes":[{"id":1,"samples":[{"id":"x","path":"nope.fmx"}]}]})", dir);
        }) == ErrorCode::IoError);
  CHECK(code_of([&] { parse_manifest(R"({"classes":[{"samples":[]}]})", dir); }) == ErrorCode::FormatError);
  fs::remove_all(dir);
}

TEST_CASE("split sizes") {
  SplitSpec spec;
  spec.gallery_per_class = 5;
  spec.seed = 3;
  const Split s = gallery_probe_split(synthetic_manifest(4, 10), spec);
  CHECK(s.gallery.size() == 20);
  CHECK(s.probe.size() == 20);

  SplitSpec half;
  const Split h = gallery_probe_split(synthetic_manifest(1, 7), half);
  CHECK(h.gallery.size() == 4);
  CHECK(h.probe.size() == 3);

  SplitSpec too_many;
  too_many.gallery_per_class = 7;
  CHECK(code_of([&] { gallery_probe_split(synthetic_manifest(1, 7), too_many); }) == ErrorCode::EmptyClass);
  CHECK(code_of([&] { gallery_probe_split(synthetic_manifest(1, 1), half); }) == ErrorCode::EmptyClass);
}

TEST_CASE("split is deterministic, disjoint and exhaustive") {
  const Manifest m = synthetic_manifest(3, 9);
  SplitSpec spec;
  spec.seed = 11;
  const Split a = gallery_probe_split(m, spec);
  const Split b = gallery_probe_split(m, spec);
  auto ids = [](const std::vector<LabeledSample>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.entry.sample_id);
    return out;
  };
  CHECK(ids(a.gallery) == ids(b.gallery));
  CHECK(ids(a.probe) == ids(b.probe));

  const auto gallery_ids = ids(a.gallery);
  const std::set<std::string> g(gallery_ids.begin(), gallery_ids.end());
  std::set<std::string> all;
  for (const auto& id : ids(a.gallery)) all.insert(id);
  for (const auto& id : ids(a.probe)) {
    CHECK(g.count(id) == 0);
    all.insert(id);
  }
  CHECK(all.size() == m.sample_count());
  for (const auto& s : a.gallery) CHECK(s.entry.sample_id.substr(1, 1) == std::to_string(s.label / 3));

  spec.seed = 12;
  CHECK(ids(gallery_probe_split(m, spec).gallery) != ids(a.gallery));
}

TEST_CASE("few-shot subsampling") {
  const Manifest m = synthetic_manifest(3, 10);
  SplitSpec spec;
  spec.gallery_per_class = 6;
  const Split s = gallery_probe_split(m, spec);
  const auto k2 = few_shot_subsample(s.gallery, 2, 5);
  CHECK(k2.size() == 6);
  std::map<ClassId, int> counts;
  for (const auto& x : k2) ++counts[x.label];
  for (const auto& [c, n] : counts) CHECK(n == 2);
  CHECK(code_of([&] { few_shot_subsample(s.gallery, 7, 5); }) == ErrorCode::InvalidConfig);

  spec.few_shot_k = 1;
  const Split one = gallery_probe_split(m, spec);
  CHECK(one.gallery.size() == 3);
  CHECK(one.probe.size() == 12);
}

TEST_CASE("noise injection") {
  FeatureMatrix x;
  x.data = Eigen::MatrixXd::Constant(20, 500, 100.0);
  x.sample_id = "s";
  NoiseSpec zero;
  const FeatureMatrix same = add_gaussian_noise(x, zero);
  CHECK(std::memcmp(same.data.data(), x.data.data(), sizeof(double) * x.data.size()) == 0);

  NoiseSpec n;
  n.sigma = 20;
  n.seed = 4;
  const FeatureMatrix y = add_gaussian_noise(x, n);
  const Eigen::ArrayXXd diff = (y.data - x.data).array();
  const double mean = diff.mean();
  const double sd = std::sqrt((diff - mean).square().sum() / (diff.size() - 1));
  CHECK(sd >= 18.0);
  CHECK(sd <= 22.0);
  CHECK(add_gaussian_noise(x, n).data == y.data);

  FeatureMatrix other = x;
  other.sample_id = "t";
  CHECK(add_gaussian_noise(other, n).data != y.data);

  n.value_range = std::make_pair(90.0, 110.0);
  const FeatureMatrix clamped = add_gaussian_noise(x, n);
  CHECK(clamped.data.minCoeff() >= 90.0);
  CHECK(clamped.data.maxCoeff() <= 110.0);
}

TEST_CASE("keyed streams") {
  auto a = keyed_stream(1, hash_key("abc"));
  auto b = keyed_stream(1, hash_key("abc"));
  auto c = keyed_stream(2, hash_key("abc"));
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(hash_key("abc") != hash_key("abd"));
}

}  // TEST_SUITE
