#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "permstab/bundle.hpp"
#include "permstab/modes.hpp"
#include "permstab/preference.hpp"

namespace permstab {

using Json = nlohmann::json;

inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr char kBundleMagic[4] = {'H', 'S', 'B', '1'};
inline constexpr std::size_t kBundleHeaderBytes = 20;

// ---- files ------------------------------------------------------------

/// Throws IoFailure.
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Reads one JSON value per non-blank line. Throws MalformedInput with the
/// offending line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// ---- canonical JSON ---------------------------------------------------

/// Compact JSON with keys sorted and every real printed with 17
/// significant digits. Throws InvalidArgument on NaN or infinity.
std::string canonical_json(const Json& value);

// ---- hidden-state bundles --------------------------------------------

/// Little-endian "HSB1" container:
///   magic[4] | u32 version | u32 N | u32 d | u32 n
///   | N*n u8 permutation indices | N*d f32 states, row-major
/// Text fields go to a JSON manifest at manifest_path(path).
std::string encode_bundle(const HiddenStateBundle& bundle);
Json bundle_manifest(const HiddenStateBundle& bundle);

/// Parses the binary container and merges the manifest into the result.
HiddenStateBundle decode_bundle(std::string_view bytes, const Json& manifest);

std::filesystem::path manifest_path(const std::filesystem::path& bundle_path);

void write_bundle(const HiddenStateBundle& bundle, const std::filesystem::path& path);
HiddenStateBundle read_bundle(const std::filesystem::path& path);

// ---- pipeline documents -----------------------------------------------

Json partition_to_json(const ModePartition& partition);
ModePartition partition_from_json(const Json& j);

Json representatives_to_json(const RepresentativeSet& reps);
RepresentativeSet representatives_from_json(const Json& j);

Json preference_to_json(const PreferenceTuple& tuple);
PreferenceTuple preference_from_json(const Json& j);

}  // namespace permstab
