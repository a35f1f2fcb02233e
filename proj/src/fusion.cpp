// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/fusion.hpp"

#include <algorithm>

namespace omniemb {

const char* to_string(FusionStrategy s) {
    return s == FusionStrategy::interleaved ? "interleaved" : "separate";
}

FusionStrategy fusion_from_string(const std::string& s) {
    if (s == "interleaved") return FusionStrategy::interleaved;
    if (s == "separate") return FusionStrategy::separate;
    throw ValidationError("unknown fusion strategy '" + s + "' (expected interleaved|separate)");
}

const char* to_string(LateFusionCombiner c) {
    switch (c) {
        case LateFusionCombiner::max: return "max";
        case LateFusionCombiner::mean: return "mean";
        case LateFusionCombiner::sum: return "sum";
    }
    return "unknown";
}

LateFusionCombiner combiner_from_string(const std::string& s) {
    if (s == "max") return LateFusionCombiner::max;
    if (s == "mean") return LateFusionCombiner::mean;
    if (s == "sum") return LateFusionCombiner::sum;
    throw ValidationError("unknown combiner '" + s + "' (expected max|mean|sum)");
}

namespace {

// tie-break priority when two frames share a timestamp
int modality_priority(Modality m) {
    switch (m) {
        case Modality::audio: return 0;
        case Modality::video: return 1;
        case Modality::image: return 2;
        case Modality::text: return 3;
    }
    return 3;
}

}  // namespace

Stream interleave(const std::vector<Stream>& streams) {
    if (streams.size() < 2) {
        throw ValidationError("interleave: needs at least two streams");
    }
    std::size_t d_in = 0;
    for (const Stream& s : streams) {
        validate(s, "interleave input");
        if (s.modality == Modality::text) {
            throw ValidationError("interleave: text streams cannot be interleaved with media");
        }
        std::size_t d = s.timeline.front().values.size();
        if (d_in == 0) {
            d_in = d;
        } else if (d != d_in) {
            throw ValidationError("interleave: streams disagree on input dim");
        }
    }

    struct Tagged {
        double t;
        int priority;
        std::size_t stream_index;  // stabilizes the sort within one modality
        std::size_t frame_index;
        const Frame* frame;
    };
    std::vector<Tagged> tagged;
    for (std::size_t si = 0; si < streams.size(); ++si) {
        const Stream& s = streams[si];
        for (std::size_t fi = 0; fi < s.timeline.size(); ++fi) {
            tagged.push_back({s.timeline[fi].t, modality_priority(s.modality), si, fi,
                              &s.timeline[fi]});
        }
    }
    std::sort(tagged.begin(), tagged.end(), [](const Tagged& a, const Tagged& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.priority != b.priority) return a.priority < b.priority;
        if (a.stream_index != b.stream_index) return a.stream_index < b.stream_index;
        return a.frame_index < b.frame_index;
    });

    Stream out;
    out.modality = Modality::video;
    out.timeline.reserve(tagged.size());
    for (const Tagged& t : tagged) {
        out.timeline.push_back(*t.frame);
    }
    return out;
}

double score_document(const Embedding& query,
                      const std::vector<std::pair<std::string, Embedding>>& doc,
                      SimilarityFn fn,
                      LateFusionCombiner combiner) {
    if (doc.empty()) {
        throw ValidationError("score_document: empty embedding list");
    }
    double best = 0.0;
    double acc = 0.0;
    bool first = true;
    for (const auto& [label, e] : doc) {
        double s = similarity(query, e, fn);
        acc += s;
        if (first || s > best) {
            best = s;
        }
        first = false;
    }
    switch (combiner) {
        case LateFusionCombiner::max: return best;
        case LateFusionCombiner::sum: return acc;
        case LateFusionCombiner::mean: return acc / static_cast<double>(doc.size());
    }
    throw ValidationError("score_document: unknown combiner");
}

}  // namespace omniemb
