#include "emint/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "emint/errors.hpp"
#include "emint/rng.hpp"

namespace emint {

using nlohmann::json;

void ScorerConfig::validate() const {
    if (hidden_units < 1) throw ValidationError("scorer: hidden_units must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("scorer: learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("scorer: momentum must be in [0,1)");
    if (!(lr_gamma > 0.0 && lr_gamma <= 1.0)) throw ValidationError("scorer: lr_gamma must be in (0,1]");
    if (lr_step_epochs < 1) throw ValidationError("scorer: lr_step_epochs must be >= 1");
    if (epochs < 0) throw ValidationError("scorer: epochs must be >= 0");
    if (batch_size < 1) throw ValidationError("scorer: batch_size must be >= 1");
}

ScorerModel ScorerModel::init(int t, int d, const ScorerConfig& config) {
    if (t < 1 || d < 1) throw ValidationError("scorer: t and d must be >= 1");
    config.validate();
    ScorerModel m;
    m.t_ = t;
    m.d_ = d;
    m.hidden_ = config.hidden_units;
    m.config_ = config;

    const int in = t * d;
    m.w1.resize(static_cast<std::size_t>(m.hidden_) * in);
    m.b1.assign(static_cast<std::size_t>(m.hidden_), 0.0);
    m.w2.resize(static_cast<std::size_t>(kNumClasses) * m.hidden_);
    m.b2.assign(kNumClasses, 0.0);

    Rng rng(derive_seed(config.seed, "init"));
    const double a1 = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& w : m.w1) w = rng.uniform(-a1, a1);
    const double a2 = 1.0 / std::sqrt(static_cast<double>(m.hidden_));
    for (auto& w : m.w2) w = rng.uniform(-a2, a2);
    return m;
}

std::size_t ScorerModel::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

double ScorerModel::parameter(std::size_t i) const {
    if (i < w1.size()) return w1[i];
    i -= w1.size();
    if (i < b1.size()) return b1[i];
    i -= b1.size();
    if (i < w2.size()) return w2[i];
    i -= w2.size();
    return b2[i];
}

void ScorerModel::set_parameter(std::size_t i, double v) {
    if (i < w1.size()) { w1[i] = v; return; }
    i -= w1.size();
    if (i < b1.size()) { b1[i] = v; return; }
    i -= b1.size();
    if (i < w2.size()) { w2[i] = v; return; }
    i -= w2.size();
    b2[i] = v;
}

bool ScorerModel::same_parameters(const ScorerModel& other) const {
    return t_ == other.t_ && d_ == other.d_ && hidden_ == other.hidden_ && w1 == other.w1 &&
           b1 == other.b1 && w2 == other.w2 && b2 == other.b2;
}

namespace {

void hidden_activations(const ScorerModel& m, std::span<const float> window, std::vector<double>& h) {
    const int in = m.input_dim();
    h.resize(static_cast<std::size_t>(m.hidden()));
    for (int u = 0; u < m.hidden(); ++u) {
        double acc = m.b1[static_cast<std::size_t>(u)];
        const double* row = m.w1.data() + static_cast<std::size_t>(u) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * static_cast<double>(window[static_cast<std::size_t>(i)]);
        h[static_cast<std::size_t>(u)] = std::tanh(acc);
    }
}

std::array<double, kNumClasses> output_logits(const ScorerModel& m, const std::vector<double>& h) {
    std::array<double, kNumClasses> z{};
    for (int c = 0; c < kNumClasses; ++c) {
        double acc = m.b2[static_cast<std::size_t>(c)];
        const double* row = m.w2.data() + static_cast<std::size_t>(c) * m.hidden();
        for (int u = 0; u < m.hidden(); ++u) acc += row[u] * h[static_cast<std::size_t>(u)];
        z[static_cast<std::size_t>(c)] = acc;
    }
    return z;
}

std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& z) {
    double mx = z[0];
    for (const double v : z) mx = std::max(mx, v);
    std::array<double, kNumClasses> p{};
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        p[c] = std::exp(z[c] - mx);
        sum += p[c];
    }
    for (auto& v : p) v /= sum;
    return p;
}

struct Gradients {
    std::vector<double> w1, b1, w2, b2;

    explicit Gradients(const ScorerModel& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0), b2(m.b2.size(), 0.0) {}
};

// Mean cross-entropy over the index range; accumulates gradients when given.
double batch_pass(const ScorerModel& m, const SegmentDataset& data, std::span<const std::size_t> idx,
                  Gradients* grads) {
    const int in = m.input_dim();
    const double inv_n = 1.0 / static_cast<double>(idx.size());
    std::vector<double> h;
    double loss = 0.0;
    for (const std::size_t row : idx) {
        const auto& window = data.features[row];
        if (static_cast<int>(window.size()) != in)
            throw ValidationError("scorer: window feature size " + std::to_string(window.size()) +
                                  " does not match model input " + std::to_string(in));
        const int label = data.windows[row].label;
        if (label < 0 || label >= kNumClasses)
            throw ValidationError("scorer: label out of range: " + std::to_string(label));

        hidden_activations(m, window, h);
        const auto z = output_logits(m, h);
        const auto p = softmax(z);
        loss -= std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300)) * inv_n;

        if (!grads) continue;
        std::array<double, kNumClasses> dz{};
        for (std::size_t c = 0; c < kNumClasses; ++c)
            dz[c] = (p[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_n;
        std::vector<double> dh(static_cast<std::size_t>(m.hidden()), 0.0);
        for (int c = 0; c < kNumClasses; ++c) {
            const double g = dz[static_cast<std::size_t>(c)];
            double* wrow = grads->w2.data() + static_cast<std::size_t>(c) * m.hidden();
            const double* mrow = m.w2.data() + static_cast<std::size_t>(c) * m.hidden();
            for (int u = 0; u < m.hidden(); ++u) {
                wrow[u] += g * h[static_cast<std::size_t>(u)];
                dh[static_cast<std::size_t>(u)] += g * mrow[u];
            }
            grads->b2[static_cast<std::size_t>(c)] += g;
        }
        for (int u = 0; u < m.hidden(); ++u) {
            const double hu = h[static_cast<std::size_t>(u)];
            const double da = dh[static_cast<std::size_t>(u)] * (1.0 - hu * hu);
            double* wrow = grads->w1.data() + static_cast<std::size_t>(u) * in;
            for (int i = 0; i < in; ++i) wrow[i] += da * static_cast<double>(window[static_cast<std::size_t>(i)]);
            grads->b1[static_cast<std::size_t>(u)] += da;
        }
    }
    return loss;
}

} // namespace

std::array<double, kNumClasses> ScorerModel::logits(std::span<const float> window) const {
    if (static_cast<int>(window.size()) != input_dim())
        throw ValidationError("scorer: window size " + std::to_string(window.size()) +
                              " does not match model input " + std::to_string(input_dim()));
    for (const float v : window)
        if (!std::isfinite(v)) throw ValidationError("scorer: non-finite feature value");
    std::vector<double> h;
    hidden_activations(*this, window, h);
    return output_logits(*this, h);
}

Prediction ScorerModel::forward(std::span<const float> window) const {
    const auto z = logits(window);
    Prediction pred;
    pred.probs = softmax(z);
    pred.cls = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(pred.cls)]) pred.cls = c;
    return pred;
}

std::vector<int> ScorerModel::predict(const SegmentDataset& dataset) const {
    std::vector<int> out;
    out.reserve(dataset.size());
    for (const auto& window : dataset.features) out.push_back(forward(window).cls);
    return out;
}

double scheduled_lr(const ScorerConfig& config, int epoch) {
    const int steps = (epoch - 1) / config.lr_step_epochs;
    return config.learning_rate * std::pow(config.lr_gamma, steps);
}

std::vector<EpochLog> train(ScorerModel& model, const SegmentDataset& dataset,
                            const ScorerConfig& config) {
    config.validate();
    if (config.epochs > 0 && dataset.empty()) throw ValidationError("train: dataset is empty");

    std::vector<EpochLog> curve;
    if (config.epochs == 0) return curve;

    Gradients velocity(model);
    std::fill(velocity.w1.begin(), velocity.w1.end(), 0.0);
    Rng shuffler(derive_seed(config.seed, "shuffle"));
    const std::size_t n = dataset.size();

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = scheduled_lr(config, epoch);
        auto order = shuffler.permutation(n);
        double epoch_loss = 0.0;

        int batch_index = 0;
        for (std::size_t pos = 0; pos < n; pos += static_cast<std::size_t>(config.batch_size), ++batch_index) {
            const std::size_t count = std::min<std::size_t>(config.batch_size, n - pos);
            std::span<const std::size_t> idx(order.data() + pos, count);

            Gradients grads(model);
            const double loss = batch_pass(model, dataset, idx, &grads);
            if (!std::isfinite(loss))
                throw TrainingError("train: non-finite loss", epoch, batch_index);
            epoch_loss += loss * static_cast<double>(count);

            const auto update = [&](std::vector<double>& param, std::vector<double>& vel,
                                    const std::vector<double>& g) {
                for (std::size_t i = 0; i < param.size(); ++i) {
                    vel[i] = config.momentum * vel[i] - lr * g[i];
                    param[i] += vel[i];
                    if (!std::isfinite(param[i]))
                        throw TrainingError("train: non-finite parameter", epoch, batch_index);
                }
            };
            update(model.w1, velocity.w1, grads.w1);
            update(model.b1, velocity.b1, grads.b1);
            update(model.w2, velocity.w2, grads.w2);
            update(model.b2, velocity.b2, grads.b2);
        }
        curve.push_back(EpochLog{epoch_loss / static_cast<double>(n), lr});
    }
    return curve;
}

double batch_loss(const ScorerModel& model, const SegmentDataset& batch) {
    if (batch.empty()) throw ValidationError("batch_loss: empty batch");
    std::vector<std::size_t> idx(batch.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return batch_pass(model, batch, idx, nullptr);
}

std::vector<double> batch_gradient(const ScorerModel& model, const SegmentDataset& batch) {
    if (batch.empty()) throw ValidationError("batch_gradient: empty batch");
    std::vector<std::size_t> idx(batch.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Gradients grads(model);
    batch_pass(model, batch, idx, &grads);
    std::vector<double> flat;
    flat.reserve(model.parameter_count());
    flat.insert(flat.end(), grads.w1.begin(), grads.w1.end());
    flat.insert(flat.end(), grads.b1.begin(), grads.b1.end());
    flat.insert(flat.end(), grads.w2.begin(), grads.w2.end());
    flat.insert(flat.end(), grads.b2.begin(), grads.b2.end());
    return flat;
}

double grad_check(const ScorerModel& model, const SegmentDataset& batch, double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
        throw ValidationError("grad_check: epsilon must be in [1e-7, 1e-3]");
    if (batch.empty()) throw ValidationError("grad_check: empty batch");

    const auto analytic = batch_gradient(model, batch);
    const std::size_t n_params = model.parameter_count();

    std::vector<std::size_t> which;
    constexpr std::size_t kSample = 200;
    if (n_params <= kSample) {
        which.resize(n_params);
        for (std::size_t i = 0; i < n_params; ++i) which[i] = i;
    } else {
        Rng rng(derive_seed(model.config().seed, "grad_check"));
        std::vector<std::size_t> all(n_params);
        for (std::size_t i = 0; i < n_params; ++i) all[i] = i;
        rng.shuffle(all);
        which.assign(all.begin(), all.begin() + kSample);
    }

    ScorerModel probe = model;
    double max_rel = 0.0;
    for (const std::size_t i : which) {
        const double orig = probe.parameter(i);
        probe.set_parameter(i, orig + epsilon);
        const double lp = batch_loss(probe, batch);
        probe.set_parameter(i, orig - epsilon);
        const double lm = batch_loss(probe, batch);
        probe.set_parameter(i, orig);
        const double numeric = (lp - lm) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
    }
    return max_rel;
}

namespace {

constexpr char kCheckpointMagic[8] = {'E', 'M', 'S', 'C', '0', '0', '0', '1'};

json config_to_json(const ScorerConfig& c) {
    return json{{"hidden_units", c.hidden_units}, {"learning_rate", c.learning_rate},
                {"momentum", c.momentum},         {"lr_step_epochs", c.lr_step_epochs},
                {"lr_gamma", c.lr_gamma},         {"epochs", c.epochs},
                {"batch_size", c.batch_size},     {"seed", c.seed}};
}

ScorerConfig config_from_json(const json& j) {
    ScorerConfig c;
    c.hidden_units = j.at("hidden_units").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.lr_step_epochs = j.at("lr_step_epochs").get<int>();
    c.lr_gamma = j.at("lr_gamma").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

struct ScorerIo {
    static void save(const ScorerModel& m, const std::filesystem::path& path) {
        std::vector<float> block;
        block.reserve(m.parameter_count());
        for (const auto* vec : {&m.w1, &m.b1, &m.w2, &m.b2})
            for (const double v : *vec) block.push_back(static_cast<float>(v));

        json header;
        header["t"] = m.t_;
        header["d"] = m.d_;
        header["hidden"] = m.hidden_;
        header["config"] = config_to_json(m.config_);
        header["param_count"] = block.size();
        const std::string header_text = header.dump();

        const std::uint64_t checksum = fnv1a64(block.data(), block.size() * sizeof(float));

        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
        const auto hlen = static_cast<std::uint32_t>(header_text.size());
        out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
        out.write(header_text.data(), hlen);
        out.write(reinterpret_cast<const char*>(block.data()),
                  static_cast<std::streamsize>(block.size() * sizeof(float)));
        out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
        if (!out) throw IoError("write failed for " + path.string());
    }

    static ScorerModel load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path.string());
        char magic[8];
        in.read(magic, sizeof(magic));
        if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
            throw ValidationError("not a scorer checkpoint: " + path.string());
        std::uint32_t hlen = 0;
        in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
        std::string header_text(hlen, '\0');
        in.read(header_text.data(), hlen);
        if (!in) throw IoError("short read in " + path.string());
        const json header = json::parse(header_text, nullptr, false);
        if (header.is_discarded()) throw ValidationError("corrupt checkpoint header: " + path.string());

        ScorerModel m;
        m.t_ = header.at("t").get<int>();
        m.d_ = header.at("d").get<int>();
        m.hidden_ = header.at("hidden").get<int>();
        m.config_ = config_from_json(header.at("config"));
        const auto count = header.at("param_count").get<std::size_t>();

        std::vector<float> block(count);
        in.read(reinterpret_cast<char*>(block.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        std::uint64_t checksum = 0;
        in.read(reinterpret_cast<char*>(&checksum), sizeof(checksum));
        if (!in) throw IoError("short read in " + path.string());
        if (fnv1a64(block.data(), block.size() * sizeof(float)) != checksum)
            throw ValidationError("checkpoint checksum mismatch: " + path.string());

        const int input = m.t_ * m.d_;
        const std::size_t nw1 = static_cast<std::size_t>(m.hidden_) * input;
        const std::size_t nw2 = static_cast<std::size_t>(kNumClasses) * m.hidden_;
        if (count != nw1 + m.hidden_ + nw2 + kNumClasses)
            throw ValidationError("checkpoint parameter count mismatch: " + path.string());
        std::size_t pos = 0;
        const auto take = [&](std::size_t n) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(block[pos++]);
            return v;
        };
        m.w1 = take(nw1);
        m.b1 = take(static_cast<std::size_t>(m.hidden_));
        m.w2 = take(nw2);
        m.b2 = take(kNumClasses);
        return m;
    }
};

void save_checkpoint(const ScorerModel& model, const std::filesystem::path& path) {
    ScorerIo::save(model, path);
}

ScorerModel load_checkpoint(const std::filesystem::path& path) {
    return ScorerIo::load(path);
}

} // namespace emint
