#include "permstab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "permstab/error.hpp"

namespace permstab {
namespace fs = std::filesystem;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "cannot encode a non-finite number as JSON");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
  out += text;
  if (text.find_first_of(".e") == std::string_view::npos) out += ".0";
}

void write_canonical(std::string& out, const Json& v) {
  switch (v.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_canonical(out, it.value());
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        write_canonical(out, v[i]);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      write_number(out, v.get<double>());
      break;
    default:
      out += v.dump(-1, ' ', false, Json::error_handler_t::strict);
  }
}

// Typed field access that reports schema problems as MalformedInput.
template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::MalformedInput, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("field '") + key + "': " + e.what());
  }
}

Json matrix_to_json(const DenseMatrix& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

DenseMatrix matrix_from_json(const Json& j) {
  try {
    return DenseMatrix(field<std::size_t>(j, "rows"), field<std::size_t>(j, "cols"),
                       field<std::vector<double>>(j, "values"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedInput) throw;
    throw Error(ErrorCode::MalformedInput, e.what());
  }
}

std::string layer_string(const Json& j) {
  if (!j.contains("layer_index") || j.at("layer_index").is_null()) return {};
  const Json& v = j.at("layer_index");
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "error reading '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoFailure, "cannot move output into '" + path.string() + "'");
  }
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Json> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::MalformedInput, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string canonical_json(const Json& value) {
  std::string out;
  write_canonical(out, value);
  return out;
}

fs::path manifest_path(const fs::path& bundle_path) {
  fs::path p = bundle_path;
  p += ".json";
  return p;
}

std::string encode_bundle(const HiddenStateBundle& bundle) {
  bundle.validate();
  const std::size_t count = bundle.size();
  const std::size_t d = bundle.states.cols();
  const std::size_t n = bundle.documents.size();
  std::string out;
  out.reserve(kBundleHeaderBytes + count * n + count * d * 4);
  out.append(kBundleMagic, 4);
  put_u32(out, kBundleVersion);
  put_u32(out, static_cast<std::uint32_t>(count));
  put_u32(out, static_cast<std::uint32_t>(d));
  put_u32(out, static_cast<std::uint32_t>(n));
  for (const Permutation& p : bundle.permutations)
    for (std::size_t v : p) out.push_back(static_cast<char>(static_cast<std::uint8_t>(v)));
  for (double v : bundle.states.values()) {
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) throw Error(ErrorCode::BundleInvalid, "state value overflows 32-bit float");
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

Json bundle_manifest(const HiddenStateBundle& bundle) {
  Json answers = nullptr;
  if (bundle.answers) {
    answers = Json::array();
    for (const auto& a : *bundle.answers) answers.push_back(a ? Json(*a) : Json(nullptr));
  }
  return Json{{"query_id", bundle.query_id},
              {"query", bundle.query},
              {"documents", bundle.documents},
              {"gold_answers", bundle.gold_answers},
              {"answers", answers},
              {"model_id", bundle.model_id},
              {"layer_index", bundle.layer_index},
              {"temperature", bundle.temperature}};
}

HiddenStateBundle decode_bundle(std::string_view bytes, const Json& manifest) {
  if (bytes.size() < 4) throw Error(ErrorCode::CorruptPayload, "file shorter than the magic number");
  if (bytes.substr(0, 4) != std::string_view(kBundleMagic, 4)) {
    throw Error(ErrorCode::BadMagic, "not a hidden-state bundle (expected HSB1)");
  }
  if (bytes.size() < kBundleHeaderBytes) throw Error(ErrorCode::CorruptPayload, "truncated header");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kBundleVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "bundle version " + std::to_string(version));
  }
  const std::size_t count = get_u32(bytes, 8);
  const std::size_t d = get_u32(bytes, 12);
  const std::size_t n = get_u32(bytes, 16);
  const std::uint64_t expected = kBundleHeaderBytes + static_cast<std::uint64_t>(count) * n +
                                 static_cast<std::uint64_t>(count) * d * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::CorruptPayload, "payload is " + std::to_string(bytes.size()) + " bytes, header implies " +
                                               std::to_string(expected));
  }
  if (count == 0 || d == 0 || n == 0) throw Error(ErrorCode::CorruptPayload, "header has a zero count");

  HiddenStateBundle b;
  std::size_t offset = kBundleHeaderBytes;
  b.permutations.resize(count);
  for (auto& p : b.permutations) {
    p.resize(n);
    for (auto& v : p) v = static_cast<unsigned char>(bytes[offset++]);
  }
  std::vector<double> values(count * d);
  for (double& v : values) {
    v = static_cast<double>(std::bit_cast<float>(get_u32(bytes, offset)));
    offset += 4;
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "hidden state contains NaN or infinity");
  }
  b.states = DenseMatrix(count, d, std::move(values));

  b.query_id = field<std::string>(manifest, "query_id");
  b.query = field<std::string>(manifest, "query");
  b.documents = field<std::vector<std::string>>(manifest, "documents");
  b.gold_answers = field<std::vector<std::string>>(manifest, "gold_answers");
  if (manifest.contains("answers") && !manifest.at("answers").is_null()) {
    const Json& list = manifest.at("answers");
    if (!list.is_array()) throw Error(ErrorCode::MalformedInput, "field 'answers' must be an array");
    std::vector<std::optional<std::string>> answers;
    for (const Json& a : list) {
      if (a.is_null()) {
        answers.emplace_back();
      } else if (a.is_string()) {
        answers.emplace_back(a.get<std::string>());
      } else {
        throw Error(ErrorCode::MalformedInput, "field 'answers' holds a non-string entry");
      }
    }
    b.answers = std::move(answers);
  }
  b.model_id = manifest.value("model_id", std::string{});
  b.layer_index = layer_string(manifest);
  if (manifest.contains("temperature")) b.temperature = field<double>(manifest, "temperature");
  if (b.documents.size() != n) {
    throw Error(ErrorCode::CorruptPayload, "manifest lists " + std::to_string(b.documents.size()) +
                                               " documents, header says " + std::to_string(n));
  }
  b.validate();
  return b;
}

void write_bundle(const HiddenStateBundle& bundle, const fs::path& path) {
  const std::string bytes = encode_bundle(bundle);
  write_file_atomic(path, bytes);
  write_file_atomic(manifest_path(path), canonical_json(bundle_manifest(bundle)) + "\n");
}

HiddenStateBundle read_bundle(const fs::path& path) {
  const std::string bytes = read_file(path);
  // The binary part is checked before the manifest is required.
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) != std::string_view(kBundleMagic, 4)) {
    throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is not a hidden-state bundle");
  }
  Json manifest;
  try {
    manifest = Json::parse(read_file(manifest_path(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, "manifest: " + std::string(e.what()));
  }
  return decode_bundle(bytes, manifest);
}

Json partition_to_json(const ModePartition& p) {
  return Json{{"query_id", p.query_id},
              {"k", p.k},
              {"sigma", p.sigma_used},
              {"eigenvalues", p.eigenvalues},
              {"embedding", matrix_to_json(p.embedding)},
              {"labels", p.assignment.labels},
              {"cluster_sizes", p.cluster_sizes}};
}

ModePartition partition_from_json(const Json& j) {
  ModePartition p;
  p.query_id = field<std::string>(j, "query_id");
  p.k = field<std::size_t>(j, "k");
  p.sigma_used = field<double>(j, "sigma");
  p.eigenvalues = field<std::vector<double>>(j, "eigenvalues");
  p.embedding = matrix_from_json(field<Json>(j, "embedding"));
  p.assignment = Assignment{field<std::vector<std::size_t>>(j, "labels"), p.k};
  p.cluster_sizes = field<std::vector<std::size_t>>(j, "cluster_sizes");
  if (p.k == 0 || p.cluster_sizes.size() != p.k) throw Error(ErrorCode::MalformedInput, "cluster_sizes length != k");
  std::vector<std::size_t> sizes(p.k, 0);
  for (std::size_t l : p.assignment.labels) {
    if (l >= p.k) throw Error(ErrorCode::MalformedInput, "label out of range");
    ++sizes[l];
  }
  if (sizes != p.cluster_sizes) throw Error(ErrorCode::MalformedInput, "cluster_sizes disagree with labels");
  return p;
}

Json representatives_to_json(const RepresentativeSet& reps) {
  Json clusters = Json::array();
  for (const Representative& r : reps.clusters) {
    clusters.push_back(Json{{"cluster", r.cluster},
                            {"centroid", r.centroid},
                            {"representative_index", r.representative_index},
                            {"representative_answer",
                             r.representative_answer ? Json(*r.representative_answer) : Json(nullptr)}});
  }
  return Json{{"query_id", reps.query_id}, {"clusters", clusters}};
}

RepresentativeSet representatives_from_json(const Json& j) {
  RepresentativeSet reps;
  reps.query_id = field<std::string>(j, "query_id");
  for (const Json& c : field<Json>(j, "clusters")) {
    Representative r;
    r.cluster = field<std::size_t>(c, "cluster");
    r.centroid = field<std::vector<double>>(c, "centroid");
    r.representative_index = field<std::size_t>(c, "representative_index");
    if (c.contains("representative_answer") && !c.at("representative_answer").is_null()) {
      r.representative_answer = field<std::string>(c, "representative_answer");
    }
    reps.clusters.push_back(std::move(r));
  }
  return reps;
}

Json preference_to_json(const PreferenceTuple& t) {
  return Json{{"query_id", t.query_id},   {"query", t.query}, {"documents", t.documents},
              {"y_w", t.y_w},             {"y_l", t.y_l},     {"category", std::string(to_string(t.category))}};
}

PreferenceTuple preference_from_json(const Json& j) {
  PreferenceTuple t;
  t.query_id = field<std::string>(j, "query_id");
  t.query = field<std::string>(j, "query");
  t.documents = field<std::vector<std::string>>(j, "documents");
  t.y_w = field<std::string>(j, "y_w");
  t.y_l = field<std::string>(j, "y_l");
  t.category = category_from_string(field<std::string>(j, "category"));
  return t;
}

}  // namespace permstab
