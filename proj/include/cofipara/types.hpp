#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cofipara/image.hpp"

namespace cofipara {

enum class Stance { kSarcastic, kNonSarcastic };

inline const char* to_string(Stance s) {
    return s == Stance::kSarcastic ? "sarcastic" : "non-sarcastic";
}

enum class Phase { kPretrain, kFinetune };

inline const char* to_string(Phase p) { return p == Phase::kPretrain ? "pretrain" : "finetune"; }

// Normalized center-size box; all coordinates in [0,1], w and h strictly positive.
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool valid() const {
        return cx >= 0.0 && cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 &&
               h > 0.0 && h <= 1.0;
    }
    double area() const { return w * h; }
};

// One multimodal instance. Rationale fields mirror the JSONL schema so raw and
// augmented datasets share a single record shape.
struct Sample {
    std::string id;
    std::string text;
    std::string image_path;
    Image image;  // may be empty until loaded
    std::optional<Stance> msd_label;
    std::vector<std::string> textual_targets;
    std::vector<BoundingBox> visual_targets;
    std::optional<std::string> rationale_pos;
    std::optional<std::string> rationale_neg;

    bool has_targets() const { return !textual_targets.empty() || !visual_targets.empty(); }
};

struct PromptText {
    std::string text;
    std::uint64_t hash = 0;
};

// Competing rationales for one sample. r_neg is absent for the finetune phase.
struct RationaleSet {
    std::string r_pos;
    std::optional<std::string> r_neg;
    std::string backend_id;
    std::uint64_t prompt_hash = 0;
};

struct AugmentedText {
    std::string text;
    Phase phase = Phase::kPretrain;
};

struct ScoredBox {
    BoundingBox box;
    double confidence = 0.0;
};

struct Prediction {
    std::vector<int> tokens;
    std::string decoded_text;
    std::vector<ScoredBox> boxes;  // sorted by descending confidence; empty at pretrain
};

// Per-step loss components; the identities below are maintained by construction.
struct LossBreakdown {
    double l_text = 0.0;
    double l_l1 = 0.0;
    double l_giou = 0.0;
    double l_cls = 0.0;
    double l_img = 0.0;
    double total = 0.0;
    double alpha = 0.2;
    double beta = 1e-3;
    double gamma = 0.1;
};

}  // namespace cofipara
