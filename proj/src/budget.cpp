// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/budget.hpp"

#include <algorithm>
#include <cmath>

#include "omniemb/errors.hpp"

namespace omniemb {

void validate(const ProcessorArgs& args) {
    if (args.min_pixels < 1 || args.min_pixels > args.max_pixels) {
        throw ValidationError("pixel clamps need 1 <= min_pixels <= max_pixels");
    }
    if (args.image_min_pixels < 1 || args.image_min_pixels > args.image_max_pixels) {
        throw ValidationError("image pixel clamps need 1 <= min <= max");
    }
    if (args.audio_max_length < 1) {
        throw ValidationError("audio_max_length must be positive");
    }
    if (!(args.video_fps > 0.0) || !(args.audio_tokens_per_second > 0.0)) {
        throw ValidationError("sampling rates must be positive");
    }
    if (args.patch_pixels < 1) {
        throw ValidationError("patch_pixels must be positive");
    }
    if (args.fused_overhead_tokens < 0 || args.per_stream_special_tokens < 0) {
        throw ValidationError("token overheads must be non-negative");
    }
}

void validate(const MediaDescriptor& m) {
    if (!(m.duration_s >= 0.0)) {
        throw ValidationError("duration_s must be >= 0");
    }
    if (m.frame_width < 0 || m.frame_height < 0 || m.text_token_count < 0) {
        throw ValidationError("descriptor dimensions must be non-negative");
    }
}

const char* to_string(BudgetSetting s) {
    switch (s) {
        case BudgetSetting::text: return "text";
        case BudgetSetting::audio_only: return "audio_only";
        case BudgetSetting::video_only: return "video_only";
        case BudgetSetting::av_fused: return "av_fused";
        case BudgetSetting::av_separate: return "av_separate";
    }
    throw ValidationError("unknown budget setting");
}

BudgetSetting budget_setting_from_string(const std::string& s) {
    if (s == "text") return BudgetSetting::text;
    if (s == "audio_only" || s == "audio") return BudgetSetting::audio_only;
    if (s == "video_only" || s == "video") return BudgetSetting::video_only;
    if (s == "av_fused" || s == "fused") return BudgetSetting::av_fused;
    if (s == "av_separate" || s == "separate") return BudgetSetting::av_separate;
    throw ValidationError("unknown budget setting '" + s +
                          "' (expected text|audio_only|video_only|av_fused|av_separate)");
}

namespace {

std::int64_t ceil_to_i64(double v) { return static_cast<std::int64_t>(std::ceil(v)); }

std::int64_t audio_total(const MediaDescriptor& m, const ProcessorArgs& args) {
    const double samples =
        std::min(m.duration_s * kAudioSampleRate, static_cast<double>(args.audio_max_length));
    return ceil_to_i64(samples / kAudioSampleRate * args.audio_tokens_per_second) +
           args.per_stream_special_tokens;
}

std::int64_t video_total(const MediaDescriptor& m, const ProcessorArgs& args) {
    const std::int64_t frames = ceil_to_i64(m.duration_s * args.video_fps);
    const std::int64_t pixels =
        std::clamp(m.frame_width * m.frame_height, args.min_pixels, args.max_pixels);
    const std::int64_t per_frame = (pixels + args.patch_pixels - 1) / args.patch_pixels;
    return frames * per_frame + args.per_stream_special_tokens;
}

void require_audio(const MediaDescriptor& m, BudgetSetting setting) {
    if (!m.has_audio) {
        throw ValidationError(std::string("setting '") + to_string(setting) +
                              "' requires media with an audio track");
    }
}

}  // namespace

SequenceLengths estimate_tokens(const MediaDescriptor& m, BudgetSetting setting,
                                const ProcessorArgs& args) {
    validate(args);
    validate(m);

    SequenceLengths out;
    switch (setting) {
        case BudgetSetting::text:
            out.per_stream.push_back(
                {"text", m.text_token_count + args.per_stream_special_tokens});
            break;
        case BudgetSetting::audio_only:
            require_audio(m, setting);
            out.per_stream.push_back({"audio", audio_total(m, args)});
            break;
        case BudgetSetting::video_only:
            out.per_stream.push_back({"video", video_total(m, args)});
            break;
        case BudgetSetting::av_separate:
            require_audio(m, setting);
            out.per_stream.push_back({"audio", audio_total(m, args)});
            out.per_stream.push_back({"video", video_total(m, args)});
            break;
        case BudgetSetting::av_fused:
            require_audio(m, setting);
            // One merged sequence: both streams share a single special-token
            // block, plus any fusion bookkeeping tokens.
            out.per_stream.push_back({"fused", audio_total(m, args) + video_total(m, args) -
                                                   args.per_stream_special_tokens +
                                                   args.fused_overhead_tokens});
            break;
    }
    for (const auto& [name, tokens] : out.per_stream) {
        out.total += tokens;
    }
    return out;
}

}  // namespace omniemb
