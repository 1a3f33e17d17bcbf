#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "treid/hdff.hpp"
#include "treid/labels.hpp"
#include "treid/matching.hpp"
#include "treid/tensor.hpp"
#include "treid/txqda.hpp"

namespace treid {

// File formats. All writers build the full content in memory and publish
// it with write-to-temp + atomic rename, so a failed command never leaves
// a partial output behind. Numeric text uses "%.17g" (round-trip exact),
// binary payloads are little-endian regardless of host.

// --- binary tensor: "TSR3", u16 version, three u32 dims, f64 payload ----
void write_tensor(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_tensor(const std::filesystem::path& path);

// --- feature text: "#FEAT v1 d=<d> m=<m>" header, one CSV row per sample
void write_features(const std::filesystem::path& path, const FeatureBlock& block);
FeatureBlock read_features(const std::filesystem::path& path, std::string source_tag = "");

// --- labels text: m lines of "<sample_id>,<person_id>,<camera_id>" ------
void write_labels(const std::filesystem::path& path, const SampleLabels& labels);
SampleLabels read_labels(const std::filesystem::path& path);

// --- model: "TXQM", u32 JSON header length, JSON, two TSR3 blocks -------
struct TxqdaModel {
    ProjectionSet projections;
    TxqdaConfig config;
};
void write_model(const std::filesystem::path& path, const TxqdaModel& model);
TxqdaModel read_model(const std::filesystem::path& path);

// --- CSV outputs ---------------------------------------------------------
void write_ranking_csv(const std::filesystem::path& path, const RankingResult& r,
                       const std::vector<std::string>& probe_sample_ids,
                       const std::vector<std::string>& gallery_sample_ids);
void write_cmc_csv(const std::filesystem::path& path, const CmcCurve& c);

// --- helpers ---------------------------------------------------------------
std::string format_double(double v);
void atomic_write_text(const std::filesystem::path& path, const std::string& content);
void atomic_write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

}  // namespace treid
