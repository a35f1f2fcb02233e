// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace omniemb {

/// Preprocessing budgets that determine tokenized sequence length per
/// modality: pixel clamps for vision, a sample cap for audio, sampling and
/// token rates, and per-stream wrapper tokens.
struct ProcessorArgs {
    std::int64_t min_pixels = 32 * 14 * 14;    // per-frame lower clamp
    std::int64_t max_pixels = 64 * 28 * 28;    // per-frame upper clamp
    std::int64_t audio_max_length = 2048000;   // samples at 16 kHz (128 s)
    std::int64_t image_max_pixels = 2352;
    std::int64_t image_min_pixels = 196;
    double video_fps = 1.0;                    // frames sampled per second
    double audio_tokens_per_second = 25.0;
    std::int64_t patch_pixels = 28 * 28;       // pixels per visual token
    std::int64_t fused_overhead_tokens = 0;
    std::int64_t per_stream_special_tokens = 2;
};

void validate(const ProcessorArgs& args);

inline constexpr double kAudioSampleRate = 16000.0;

struct MediaDescriptor {
    double duration_s = 0.0;
    std::int64_t frame_width = 0;
    std::int64_t frame_height = 0;
    bool has_audio = false;
    std::int64_t text_token_count = 0;  // transcript length for text settings
};

void validate(const MediaDescriptor& m);

enum class BudgetSetting { text, audio_only, video_only, av_fused, av_separate };

const char* to_string(BudgetSetting s);
BudgetSetting budget_setting_from_string(const std::string& s);

/// Estimated sequence lengths, per stream and total.
struct SequenceLengths {
    std::vector<std::pair<std::string, std::int64_t>> per_stream;
    std::int64_t total = 0;
};

/// Token-count model per modality setting:
///   text        -> text_token_count + special
///   audio_only  -> ceil(capped samples / 16000 * tokens_per_s) + special
///   video_only  -> ceil(duration * fps) * ceil(clamped pixels / patch) + special
///   av_separate -> both stream totals reported side by side
///   av_fused    -> audio + video totals - one special block + fused overhead
/// Audio settings require has_audio; that is the only descriptor/setting
/// compatibility constraint.
SequenceLengths estimate_tokens(const MediaDescriptor& m, BudgetSetting setting,
                                const ProcessorArgs& args);

}  // namespace omniemb
