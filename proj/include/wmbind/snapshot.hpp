#pragma once

// Model snapshots and config documents.
//
// snapshot.json layout:
//   { "format": "wmbind-snapshot", "version": 1,
//     "config": <TrainConfig>,
//     "arrays": { "<name>": {"dtype": "f64le"|"u32"|"u64", "shape": [...], "data": ...}, ... } }
// f64le arrays carry base64 of little-endian IEEE doubles so values round-trip
// bit-exactly; integer arrays are plain JSON lists.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wmbind/coupling.hpp"
#include "wmbind/harness.hpp"

namespace wmbind {

inline constexpr int kSnapshotVersion = 1;

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json config_to_json(const TrainConfig& cfg);
/// Keys present in `j` override `base`; unknown keys are an error.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base);

std::string snapshot(const WmModel& model, const TrainConfig& cfg);

struct Restored {
  WmModel model;
  TrainConfig config;
};

/// Throws SnapshotError on malformed, truncated or version-mismatched input.
Restored restore(const std::string& document);

std::string base64_encode(const unsigned char* data, std::size_t len);
std::string base64_decode(const std::string& text);

}  // namespace wmbind
