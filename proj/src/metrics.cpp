#include "msi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "msi/errors.hpp"

namespace msi {

double iou(const Bbox& a, const Bbox& b) {
    double ix0 = std::max(a.x, b.x);
    double iy0 = std::max(a.y, b.y);
    double ix1 = std::min(a.x + a.w, b.x + b.w);
    double iy1 = std::min(a.y + a.h, b.y + b.h);
    double iw = ix1 - ix0;
    double ih = iy1 - iy0;
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    double inter = iw * ih;
    double uni = a.w * a.h + b.w * b.h - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

namespace {

// Min-cost assignment for an n x m cost matrix with n <= m, via the
// potentials method. Returns the column assigned to each row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = static_cast<int>(cost[0].size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> assignment(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) assignment[p[j] - 1] = j - 1;
    return assignment;
}

std::vector<MatchPair> match_category(const TargetLayout& targets, const DetectionSet& dets,
                                      const std::vector<size_t>& t_idx, const std::vector<size_t>& d_idx,
                                      MatchPolicy policy) {
    std::vector<MatchPair> out;
    if (t_idx.empty() || d_idx.empty()) return out;

    if (policy == MatchPolicy::Greedy) {
        std::vector<size_t> order = d_idx;
        std::sort(order.begin(), order.end(), [&](size_t l, size_t r) {
            double cl = dets.detections[l].confidence;
            double cr = dets.detections[r].confidence;
            if (cl != cr) return cl > cr;
            return l < r;
        });
        std::set<size_t> taken;
        for (size_t d : order) {
            double best = 0.0;
            size_t best_t = 0;
            bool found = false;
            for (size_t t : t_idx) {
                if (taken.count(t)) continue;
                double v = iou(targets.targets[t].bbox, dets.detections[d].bbox);
                if (v > best) {
                    best = v;
                    best_t = t;
                    found = true;
                }
            }
            if (!found) continue;
            taken.insert(best_t);
            out.push_back(MatchPair{best_t, d, best});
        }
        return out;
    }

    // Optimal: minimize total (1 - IoU). Rows must be the smaller side.
    bool transposed = t_idx.size() > d_idx.size();
    const std::vector<size_t>& rows = transposed ? d_idx : t_idx;
    const std::vector<size_t>& cols = transposed ? t_idx : d_idx;
    std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c < cols.size(); ++c) {
            size_t t = transposed ? cols[c] : rows[r];
            size_t d = transposed ? rows[r] : cols[c];
            cost[r][c] = 1.0 - iou(targets.targets[t].bbox, dets.detections[d].bbox);
        }
    }
    std::vector<int> assignment = hungarian(cost);
    for (size_t r = 0; r < rows.size(); ++r) {
        if (assignment[r] < 0) continue;
        size_t c = static_cast<size_t>(assignment[r]);
        size_t t = transposed ? cols[c] : rows[r];
        size_t d = transposed ? rows[r] : cols[c];
        double v = iou(targets.targets[t].bbox, dets.detections[d].bbox);
        if (v > 0.0) out.push_back(MatchPair{t, d, v});
    }
    return out;
}

}  // namespace

std::vector<MatchPair> match_detections(const TargetLayout& targets, const DetectionSet& dets,
                                        MatchPolicy policy) {
    std::map<int64_t, std::vector<size_t>> t_by_cat, d_by_cat;
    for (size_t i = 0; i < targets.targets.size(); ++i)
        t_by_cat[targets.targets[i].category_id].push_back(i);
    for (size_t i = 0; i < dets.detections.size(); ++i)
        d_by_cat[dets.detections[i].category_id].push_back(i);

    std::vector<MatchPair> out;
    for (const auto& [category_id, t_idx] : t_by_cat) {
        auto it = d_by_cat.find(category_id);
        if (it == d_by_cat.end()) continue;
        std::vector<MatchPair> pairs = match_category(targets, dets, t_idx, it->second, policy);
        out.insert(out.end(), pairs.begin(), pairs.end());
    }
    std::sort(out.begin(), out.end(),
              [](const MatchPair& l, const MatchPair& r) { return l.target_idx < r.target_idx; });
    return out;
}

namespace {

// Align two per-sample lists by sample_id; both must cover the same ids.
template <typename L, typename R>
std::vector<std::pair<const L*, const R*>> align_samples(const std::vector<L>& lhs,
                                                         const std::vector<R>& rhs) {
    std::map<std::string, const L*> lm;
    for (const L& l : lhs) lm.emplace(l.sample_id, &l);
    std::map<std::string, const R*> rm;
    for (const R& r : rhs) rm.emplace(r.sample_id, &r);
    for (const auto& [id, ptr] : lm)
        if (!rm.count(id)) throw SampleIdMismatch("sample '" + id + "' has targets but no detections");
    for (const auto& [id, ptr] : rm)
        if (!lm.count(id)) throw SampleIdMismatch("sample '" + id + "' has detections but no targets");
    std::vector<std::pair<const L*, const R*>> out;
    for (const auto& [id, ptr] : lm) out.emplace_back(ptr, rm.at(id));
    return out;
}

MetricSummary summarize(std::vector<SampleScore> per_sample, size_t skipped) {
    MetricSummary summary;
    summary.per_sample = std::move(per_sample);
    summary.skipped_samples = skipped;
    double sum = 0.0;
    for (const SampleScore& s : summary.per_sample) sum += s.value;
    summary.corpus_mean =
        summary.per_sample.empty() ? 0.0 : sum / static_cast<double>(summary.per_sample.size());
    return summary;
}

}  // namespace

MetricSummary yolo_l(const std::vector<TargetLayout>& targets, const std::vector<DetectionSet>& dets,
                     MatchPolicy policy, MatchCounts* counts) {
    if (targets.empty() && dets.empty()) throw EmptyCorpus("no samples to score");
    auto aligned = align_samples(targets, dets);
    std::vector<SampleScore> per_sample;
    size_t skipped = 0;
    MatchCounts tally;
    for (const auto& [t, d] : aligned) {
        std::vector<MatchPair> matches = match_detections(*t, *d, policy);
        tally.matched += matches.size();
        tally.unmatched_targets += t->targets.size() - matches.size();
        tally.unmatched_detections += d->detections.size() - matches.size();
        if (t->targets.empty()) {
            ++skipped;
            continue;
        }
        double sum = 0.0;
        for (const MatchPair& m : matches) sum += m.iou;
        per_sample.push_back(SampleScore{t->sample_id, sum / static_cast<double>(t->targets.size())});
    }
    if (counts) *counts = tally;
    if (per_sample.empty()) throw EmptyCorpus("no scorable samples (all lack targets)");
    return summarize(std::move(per_sample), skipped);
}

MetricSummary yolo_subj(const std::vector<TargetLayout>& targets, const std::vector<DetectionSet>& dets,
                        double conf_min) {
    if (conf_min < 0.0 || conf_min > 1.0)
        throw InvalidRange("confidence threshold must lie in [0, 1], got " + format_double(conf_min));
    if (targets.empty() && dets.empty()) throw EmptyCorpus("no samples to score");
    auto aligned = align_samples(targets, dets);
    std::vector<SampleScore> per_sample;
    size_t skipped = 0;
    for (const auto& [t, d] : aligned) {
        if (t->targets.empty()) {
            ++skipped;
            continue;
        }
        std::map<int64_t, size_t> requested, detected;
        for (const Target& tgt : t->targets) ++requested[tgt.category_id];
        for (const Detection& det : d->detections)
            if (det.confidence >= conf_min) ++detected[det.category_id];
        size_t inter = 0, total = 0;
        for (const auto& [category_id, n] : requested) {
            total += n;
            auto it = detected.find(category_id);
            if (it != detected.end()) inter += std::min(n, it->second);
        }
        per_sample.push_back(
            SampleScore{t->sample_id, static_cast<double>(inter) / static_cast<double>(total)});
    }
    if (per_sample.empty()) throw EmptyCorpus("no scorable samples (all lack targets)");
    return summarize(std::move(per_sample), skipped);
}

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size())
        throw DimensionMismatch("vector dimensions differ: " + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine similarity undefined for zero-norm vectors");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<std::pair<EmbeddingRecord, EmbeddingRecord>> pair_embeddings(
    const std::vector<EmbeddingRecord>& refs, const std::vector<EmbeddingRecord>& gens) {
    std::map<std::string, const EmbeddingRecord*> gm;
    for (const EmbeddingRecord& g : gens) gm.emplace(g.id, &g);
    std::map<std::string, const EmbeddingRecord*> rm;
    for (const EmbeddingRecord& r : refs) rm.emplace(r.id, &r);
    for (const auto& [id, g] : gm)
        if (!rm.count(id)) throw UnpairedId("embedding id '" + id + "' has no reference record");
    std::vector<std::pair<EmbeddingRecord, EmbeddingRecord>> pairs;
    for (const auto& [id, r] : rm) {
        auto it = gm.find(id);
        if (it == gm.end()) throw UnpairedId("embedding id '" + id + "' has no generated record");
        pairs.emplace_back(*r, *it->second);
    }
    return pairs;
}

MetricSummary similarity_report(const std::vector<std::pair<EmbeddingRecord, EmbeddingRecord>>& pairs) {
    if (pairs.empty()) throw EmptyCorpus("no embedding pairs to score");
    std::vector<SampleScore> per_sample;
    for (const auto& [ref, gen] : pairs)
        per_sample.push_back(SampleScore{ref.id, cosine_similarity(ref.vector, gen.vector)});
    return summarize(std::move(per_sample), 0);
}

namespace {

Bbox parse_bbox(const Json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 4) throw SchemaViolation("bbox in " + ctx + " is not [x, y, w, h]");
    double b[4];
    for (size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number()) throw SchemaViolation("bbox coordinate in " + ctx + " is not a number");
        b[i] = j[i].get<double>();
        if (!std::isfinite(b[i])) throw SchemaViolation("bbox coordinate in " + ctx + " is not finite");
    }
    return Bbox{b[0], b[1], b[2], b[3]};
}

std::string get_sample_id(const Json& j, const std::string& ctx) {
    const Json& v = require_field(j, "sample_id", ctx);
    if (!v.is_string()) throw SchemaViolation("sample_id in " + ctx + " is not a string");
    return v.get<std::string>();
}

}  // namespace

std::vector<TargetLayout> read_targets(const std::filesystem::path& path) {
    std::vector<TargetLayout> out;
    std::set<std::string> seen;
    for (const Json& j : read_jsonl(path)) {
        TargetLayout layout;
        layout.sample_id = get_sample_id(j, "target record");
        std::string ctx = "targets of sample '" + layout.sample_id + "'";
        if (!seen.insert(layout.sample_id).second)
            throw SchemaViolation("duplicate sample_id '" + layout.sample_id + "' in " + path.string());
        const Json& targets = require_field(j, "targets", ctx);
        if (!targets.is_array()) throw SchemaViolation(ctx + " is not a list");
        for (const Json& tj : targets) {
            Target t;
            const Json& cat = require_field(tj, "category_id", ctx);
            if (!cat.is_number_integer()) throw SchemaViolation("category_id in " + ctx + " is not an integer");
            t.category_id = cat.get<int64_t>();
            t.bbox = parse_bbox(require_field(tj, "bbox", ctx), ctx);
            if (t.bbox.w <= 0.0 || t.bbox.h <= 0.0)
                throw SchemaViolation("target bbox in " + ctx + " has no area");
            layout.targets.push_back(t);
        }
        out.push_back(std::move(layout));
    }
    return out;
}

std::vector<DetectionSet> read_detections(const std::filesystem::path& path) {
    std::vector<DetectionSet> out;
    std::set<std::string> seen;
    for (const Json& j : read_jsonl(path)) {
        DetectionSet set;
        set.sample_id = get_sample_id(j, "detection record");
        std::string ctx = "detections of sample '" + set.sample_id + "'";
        if (!seen.insert(set.sample_id).second)
            throw SchemaViolation("duplicate sample_id '" + set.sample_id + "' in " + path.string());
        const Json& dets = require_field(j, "detections", ctx);
        if (!dets.is_array()) throw SchemaViolation(ctx + " is not a list");
        for (const Json& dj : dets) {
            Detection d;
            const Json& cat = require_field(dj, "category_id", ctx);
            if (!cat.is_number_integer()) throw SchemaViolation("category_id in " + ctx + " is not an integer");
            d.category_id = cat.get<int64_t>();
            d.bbox = parse_bbox(require_field(dj, "bbox", ctx), ctx);
            if (d.bbox.w < 0.0 || d.bbox.h < 0.0)
                throw SchemaViolation("detection bbox in " + ctx + " has negative extent");
            const Json& conf = require_field(dj, "confidence", ctx);
            if (!conf.is_number()) throw SchemaViolation("confidence in " + ctx + " is not a number");
            d.confidence = conf.get<double>();
            if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
                throw SchemaViolation("confidence in " + ctx + " outside [0, 1]");
            set.detections.push_back(d);
        }
        out.push_back(std::move(set));
    }
    return out;
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path) {
    std::vector<EmbeddingRecord> out;
    std::set<std::string> seen;
    size_t dim = 0;
    for (const Json& j : read_jsonl(path)) {
        EmbeddingRecord rec;
        const Json& id = require_field(j, "id", "embedding record");
        if (!id.is_string()) throw SchemaViolation("embedding id is not a string");
        rec.id = id.get<std::string>();
        std::string ctx = "embedding '" + rec.id + "'";
        if (!seen.insert(rec.id).second)
            throw SchemaViolation("duplicate embedding id '" + rec.id + "' in " + path.string());
        const Json& vec = require_field(j, "vector", ctx);
        if (!vec.is_array() || vec.empty()) throw SchemaViolation(ctx + " vector is not a non-empty list");
        double norm = 0.0;
        for (const Json& c : vec) {
            if (!c.is_number()) throw SchemaViolation(ctx + " vector holds a non-number");
            double v = c.get<double>();
            if (!std::isfinite(v)) throw SchemaViolation(ctx + " vector holds a non-finite value");
            rec.vector.push_back(v);
            norm += v * v;
        }
        if (norm == 0.0) throw ZeroVector(ctx + " has zero norm");
        if (dim == 0)
            dim = rec.vector.size();
        else if (rec.vector.size() != dim)
            throw DimensionMismatch(ctx + " has dimension " + std::to_string(rec.vector.size()) +
                                    ", file uses " + std::to_string(dim));
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

Json summary_to_json(const MetricSummary& summary) {
    Json j = Json::object();
    j["corpus_mean"] = summary.corpus_mean;
    Json per = Json::array();
    for (const SampleScore& s : summary.per_sample) {
        Json e = Json::object();
        e["sample_id"] = s.sample_id;
        e["value"] = s.value;
        per.push_back(std::move(e));
    }
    j["per_sample"] = std::move(per);
    j["skipped_samples"] = summary.skipped_samples;
    return j;
}

}  // namespace

Json report_to_json(const ScoreReport& report) {
    Json j = Json::object();
    Json defs = Json::object();
    defs["yolo_l"] =
        "per sample, mean IoU over all targets with unmatched targets scoring 0; matching is "
        "per-category bipartite assignment; corpus score is the mean over samples with targets";
    defs["yolo_subj"] =
        "per sample, |multiset_intersection(requested categories, categories detected at confidence >= "
        "conf_min)| / |requested|; corpus score is the mean over samples with targets";
    defs["embedding"] = "mean cosine similarity over (reference, generated) embedding pairs";
    j["score_definitions"] = std::move(defs);
    if (report.has_yolo) {
        j["match_policy"] = report.policy == MatchPolicy::Optimal ? "optimal" : "greedy";
        j["conf_min"] = report.conf_min;
        j["yolo_l"] = summary_to_json(report.yolo_l_summary);
        j["yolo_subj"] = summary_to_json(report.yolo_subj_summary);
        Json counts = Json::object();
        counts["matched"] = report.counts.matched;
        counts["unmatched_targets"] = report.counts.unmatched_targets;
        counts["unmatched_detections"] = report.counts.unmatched_detections;
        j["box_counts"] = std::move(counts);
    }
    if (report.has_embedding) j[report.embedding_metric] = summary_to_json(report.embedding_summary);
    return j;
}

}  // namespace msi
