#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msi/geometry.hpp"
#include "msi/io.hpp"

namespace msi {

struct Target {
    int64_t category_id = 0;
    Bbox bbox;
};

struct TargetLayout {
    std::string sample_id;
    std::vector<Target> targets;
};

struct Detection {
    int64_t category_id = 0;
    Bbox bbox;
    double confidence = 0.0;
};

struct DetectionSet {
    std::string sample_id;
    std::vector<Detection> detections;
};

struct EmbeddingRecord {
    std::string id;
    std::vector<double> vector;
};

// |a n b| / |a u b|, 0 when the union has zero area.
double iou(const Bbox& a, const Bbox& b);

enum class MatchPolicy { Optimal, Greedy };

struct MatchPair {
    size_t target_idx = 0;
    size_t detection_idx = 0;
    double iou = 0.0;
};

// Per-category assignment between targets and detections. Optimal maximizes
// total IoU via bipartite matching; Greedy walks detections by descending
// confidence. Pairs with IoU 0 are dropped. Sorted by target index.
std::vector<MatchPair> match_detections(const TargetLayout& targets, const DetectionSet& dets,
                                        MatchPolicy policy = MatchPolicy::Optimal);

struct SampleScore {
    std::string sample_id;
    double value = 0.0;
};

struct MetricSummary {
    double corpus_mean = 0.0;
    std::vector<SampleScore> per_sample;  // sorted by sample_id
    size_t skipped_samples = 0;           // samples with nothing requested
};

struct MatchCounts {
    size_t matched = 0;
    size_t unmatched_targets = 0;
    size_t unmatched_detections = 0;
};

// Mean IoU per sample over all targets, unmatched targets scoring 0;
// corpus mean over samples. Samples without targets are excluded from the
// corpus mean and counted in skipped_samples. Throws SampleIdMismatch when
// the two lists do not cover the same sample ids, EmptyCorpus on none.
MetricSummary yolo_l(const std::vector<TargetLayout>& targets, const std::vector<DetectionSet>& dets,
                     MatchPolicy policy = MatchPolicy::Optimal, MatchCounts* counts = nullptr);

// Per sample: |multiset-intersection(requested categories, detected
// categories at confidence >= conf_min)| / |requested|.
MetricSummary yolo_subj(const std::vector<TargetLayout>& targets, const std::vector<DetectionSet>& dets,
                        double conf_min = 0.5);

// u.v / (|u||v|). Throws ZeroVector, DimensionMismatch.
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

// Pairs records by id across the two files. Throws UnpairedId when an id
// appears on one side only. Pairs sorted by id.
std::vector<std::pair<EmbeddingRecord, EmbeddingRecord>> pair_embeddings(
    const std::vector<EmbeddingRecord>& refs, const std::vector<EmbeddingRecord>& gens);

// Mean cosine similarity over pairs. EmptyCorpus on none.
MetricSummary similarity_report(const std::vector<std::pair<EmbeddingRecord, EmbeddingRecord>>& pairs);

// JSONL readers with schema validation.
std::vector<TargetLayout> read_targets(const std::filesystem::path& path);
std::vector<DetectionSet> read_detections(const std::filesystem::path& path);
std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path);

struct ScoreReport {
    bool has_yolo = false;
    MatchPolicy policy = MatchPolicy::Optimal;
    double conf_min = 0.5;
    MetricSummary yolo_l_summary;
    MetricSummary yolo_subj_summary;
    MatchCounts counts;
    bool has_embedding = false;
    std::string embedding_metric;  // dino_i | clip_i | clip_b
    MetricSummary embedding_summary;
};

// Report JSON with corpus means, per-sample scores, and the formula text
// documenting the score definitions.
Json report_to_json(const ScoreReport& report);

}  // namespace msi
