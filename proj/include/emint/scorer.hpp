// 11-class intensity classifier over T-by-D window features.
//
// The reference model is a two-layer tanh network over the flattened
// window, trained with seeded mini-batch SGD with classical momentum on
// mean cross-entropy; the learning rate is multiplied by lr_gamma every
// lr_step_epochs. All arithmetic is double precision and single threaded,
// so identical (dataset, config, seed) give bit-identical parameters.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emint/segmentation.hpp"

namespace emint {

inline constexpr int kNumClasses = 11;

struct ScorerConfig {
    int hidden_units = 64;
    double learning_rate = 1e-4;
    double momentum = 0.9;
    int lr_step_epochs = 7;
    double lr_gamma = 0.1;
    int epochs = 30;
    int batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Prediction {
    int cls = 0; // argmax, lowest index wins ties
    std::array<double, kNumClasses> probs{};
};

class ScorerModel {
public:
    // Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero,
    // deterministic under config.seed.
    static ScorerModel init(int t, int d, const ScorerConfig& config);

    int t() const { return t_; }
    int d() const { return d_; }
    int hidden() const { return hidden_; }
    int input_dim() const { return t_ * d_; }
    const ScorerConfig& config() const { return config_; }

    std::size_t parameter_count() const;
    double parameter(std::size_t i) const;
    void set_parameter(std::size_t i, double v);

    std::array<double, kNumClasses> logits(std::span<const float> window) const;
    Prediction forward(std::span<const float> window) const;

    std::vector<int> predict(const SegmentDataset& dataset) const;

    bool same_parameters(const ScorerModel& other) const;

    // Flat parameter layout: w1 (hidden x in), b1, w2 (11 x hidden), b2.
    std::vector<double> w1, b1, w2, b2;

private:
    friend struct ScorerIo;
    int t_ = 0, d_ = 0, hidden_ = 0;
    ScorerConfig config_;
};

struct EpochLog {
    double mean_loss = 0.0;
    double lr = 0.0;
};

// Learning rate for a 1-based epoch under the step schedule.
double scheduled_lr(const ScorerConfig& config, int epoch);

// Trains in place; returns the per-epoch loss curve. Throws TrainingError
// on a non-finite loss.
std::vector<EpochLog> train(ScorerModel& model, const SegmentDataset& dataset,
                            const ScorerConfig& config);

// Mean cross-entropy over a batch and its analytic parameter gradient.
double batch_loss(const ScorerModel& model, const SegmentDataset& batch);
std::vector<double> batch_gradient(const ScorerModel& model, const SegmentDataset& batch);

// Central finite differences against the analytic gradient; returns the
// max relative error over all parameters (or a seeded sample of >= 200
// when the model is larger than that).
double grad_check(const ScorerModel& model, const SegmentDataset& batch, double epsilon);

// Checkpoint: magic + JSON header (dims, config) + f32 parameter block +
// FNV-1a 64 checksum of the block.
void save_checkpoint(const ScorerModel& model, const std::filesystem::path& path);
ScorerModel load_checkpoint(const std::filesystem::path& path);

} // namespace emint
