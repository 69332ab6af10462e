#include "nnsteal/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace nnsteal::nas {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_inplace(std::vector<double>& v) {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    double sum = 0.0;
    for (auto& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (auto& x : v) x /= sum;
}

}  // namespace

double EpisodeTrace::total_log_prob() const {
    double s = 0.0;
    for (double lp : log_probs) s += lp;
    return s;
}

// Gate packing order within the 4H rows: input, forget, cell, output.
Controller::Controller(const ControllerConfig& cfg, uint64_t seed) : cfg_(cfg), seed_(seed) {
    const int H = cfg.hidden, E = cfg.emb_dim;
    gate_rows_ = 4 * H;
    const int n_emb = cfg.n_kernel + cfg.n_filter;

    size_t off = 0;
    off_wx_ = off;
    off += static_cast<size_t>(gate_rows_) * E;
    off_wh_ = off;
    off += static_cast<size_t>(gate_rows_) * H;
    off_b_ = off;
    off += static_cast<size_t>(gate_rows_);
    off_emb_ = off;
    off += static_cast<size_t>(n_emb) * E;
    off_wk_ = off;
    off += static_cast<size_t>(cfg.n_kernel) * H;
    off_bk_ = off;
    off += static_cast<size_t>(cfg.n_kernel);
    off_wf_ = off;
    off += static_cast<size_t>(cfg.n_filter) * H;
    off_bf_ = off;
    off += static_cast<size_t>(cfg.n_filter);
    theta_.assign(off, 0.0);

    // weight matrices uniform in [-init_range, init_range]; biases stay zero,
    // which makes the very first action distribution exactly uniform
    Rng rng(seed);
    auto fill = [&](size_t begin, size_t count) {
        for (size_t i = 0; i < count; ++i)
            theta_[begin + i] = rng.uniform(-cfg.init_range, cfg.init_range);
    };
    fill(off_wx_, static_cast<size_t>(gate_rows_) * E);
    fill(off_wh_, static_cast<size_t>(gate_rows_) * H);
    fill(off_emb_, static_cast<size_t>(n_emb) * E);
    fill(off_wk_, static_cast<size_t>(cfg.n_kernel) * H);
    fill(off_wf_, static_cast<size_t>(cfg.n_filter) * H);
}

struct Controller::StepCache {
    int prev_global = -1;  // -1: zero input
    std::vector<double> h_prev, c_prev;
    std::vector<double> gi, gf, gg, go;  // post-nonlinearity gates
    std::vector<double> c, tanh_c, h;
    std::vector<double> logits, probs;
    int head = 0;
};

void Controller::step_forward(int prev_global_action, std::span<const double> h_in,
                              std::span<const double> c_in, int head, StepCache& cache) const {
    const int H = cfg_.hidden, E = cfg_.emb_dim;
    cache.prev_global = prev_global_action;
    cache.h_prev.assign(h_in.begin(), h_in.end());
    cache.c_prev.assign(c_in.begin(), c_in.end());
    cache.head = head;

    const double* x =
        prev_global_action < 0
            ? nullptr
            : theta_.data() + off_emb_ + static_cast<size_t>(prev_global_action) * E;

    cache.gi.resize(static_cast<size_t>(H));
    cache.gf.resize(static_cast<size_t>(H));
    cache.gg.resize(static_cast<size_t>(H));
    cache.go.resize(static_cast<size_t>(H));
    cache.c.resize(static_cast<size_t>(H));
    cache.tanh_c.resize(static_cast<size_t>(H));
    cache.h.resize(static_cast<size_t>(H));

    for (int j = 0; j < H; ++j) {
        double pre[4];
        for (int g = 0; g < 4; ++g) {
            const int row = g * H + j;
            double acc = theta_[off_b_ + static_cast<size_t>(row)];
            if (x != nullptr) {
                const double* wx = theta_.data() + off_wx_ + static_cast<size_t>(row) * E;
                for (int e = 0; e < E; ++e) acc += wx[e] * x[e];
            }
            const double* wh = theta_.data() + off_wh_ + static_cast<size_t>(row) * H;
            for (int k = 0; k < H; ++k) acc += wh[k] * h_in[static_cast<size_t>(k)];
            pre[g] = acc;
        }
        const double i = sigmoid(pre[0]);
        const double f = sigmoid(pre[1]);
        const double g = std::tanh(pre[2]);
        const double o = sigmoid(pre[3]);
        const double c = f * c_in[static_cast<size_t>(j)] + i * g;
        const double tc = std::tanh(c);
        cache.gi[static_cast<size_t>(j)] = i;
        cache.gf[static_cast<size_t>(j)] = f;
        cache.gg[static_cast<size_t>(j)] = g;
        cache.go[static_cast<size_t>(j)] = o;
        cache.c[static_cast<size_t>(j)] = c;
        cache.tanh_c[static_cast<size_t>(j)] = tc;
        cache.h[static_cast<size_t>(j)] = o * tc;
    }

    const int n_out = head == kKernelHead ? cfg_.n_kernel : cfg_.n_filter;
    const size_t off_w = head == kKernelHead ? off_wk_ : off_wf_;
    const size_t off_b = head == kKernelHead ? off_bk_ : off_bf_;
    cache.logits.assign(static_cast<size_t>(n_out), 0.0);
    for (int a = 0; a < n_out; ++a) {
        double acc = theta_[off_b + static_cast<size_t>(a)];
        const double* w = theta_.data() + off_w + static_cast<size_t>(a) * H;
        for (int k = 0; k < H; ++k) acc += w[k] * cache.h[static_cast<size_t>(k)];
        cache.logits[static_cast<size_t>(a)] = acc;
    }
    cache.probs = cache.logits;
    softmax_inplace(cache.probs);
}

namespace {

int global_action_index(const ControllerConfig& cfg, int head, int action) {
    return head == kKernelHead ? action : cfg.n_kernel + action;
}

}  // namespace

EpisodeTrace Controller::sample(std::span<const int> head_schedule, Rng& rng) const {
    EpisodeTrace trace;
    const int H = cfg_.hidden;
    std::vector<double> h(static_cast<size_t>(H), 0.0), c(static_cast<size_t>(H), 0.0);
    int prev_global = -1;
    StepCache cache;
    for (int head : head_schedule) {
        step_forward(prev_global, h, c, head, cache);
        // inverse-CDF draw from the step distribution
        const double u = rng.uniform();
        int action = 0;
        double cum = 0.0;
        for (size_t a = 0; a < cache.probs.size(); ++a) {
            cum += cache.probs[a];
            if (u < cum) {
                action = static_cast<int>(a);
                break;
            }
            action = static_cast<int>(a);  // guard against rounding at u ~ 1
        }
        trace.heads.push_back(head);
        trace.actions.push_back(action);
        trace.probs.push_back(cache.probs);
        trace.log_probs.push_back(std::log(cache.probs[static_cast<size_t>(action)]));
        prev_global = global_action_index(cfg_, head, action);
        h = cache.h;
        c = cache.c;
    }
    return trace;
}

EpisodeTrace Controller::run_teacher_forced(std::span<const int> heads,
                                            std::span<const int> actions) const {
    if (heads.size() != actions.size())
        throw std::invalid_argument("controller: |heads| != |actions|");
    EpisodeTrace trace;
    const int H = cfg_.hidden;
    std::vector<double> h(static_cast<size_t>(H), 0.0), c(static_cast<size_t>(H), 0.0);
    int prev_global = -1;
    StepCache cache;
    for (size_t t = 0; t < heads.size(); ++t) {
        step_forward(prev_global, h, c, heads[t], cache);
        trace.heads.push_back(heads[t]);
        trace.actions.push_back(actions[t]);
        trace.probs.push_back(cache.probs);
        trace.log_probs.push_back(std::log(cache.probs[static_cast<size_t>(actions[t])]));
        prev_global = global_action_index(cfg_, heads[t], actions[t]);
        h = cache.h;
        c = cache.c;
    }
    return trace;
}

void Controller::accumulate_log_prob_grad(std::span<const int> heads, std::span<const int> actions,
                                          double scale, std::span<double> grad) const {
    if (grad.size() != theta_.size())
        throw std::invalid_argument("controller: gradient buffer size mismatch");
    if (heads.size() != actions.size())
        throw std::invalid_argument("controller: |heads| != |actions|");
    const int H = cfg_.hidden, E = cfg_.emb_dim;
    const size_t T = heads.size();

    // forward pass keeping every step cache
    std::vector<StepCache> caches(T);
    {
        std::vector<double> h(static_cast<size_t>(H), 0.0), c(static_cast<size_t>(H), 0.0);
        int prev_global = -1;
        for (size_t t = 0; t < T; ++t) {
            step_forward(prev_global, h, c, heads[t], caches[t]);
            prev_global = global_action_index(cfg_, heads[t], actions[t]);
            h = caches[t].h;
            c = caches[t].c;
        }
    }

    // backward through time
    std::vector<double> dh(static_cast<size_t>(H), 0.0), dc(static_cast<size_t>(H), 0.0);
    for (size_t t = T; t-- > 0;) {
        const StepCache& cache = caches[t];
        const int head = heads[t];
        const int action = actions[t];
        const int n_out = head == kKernelHead ? cfg_.n_kernel : cfg_.n_filter;
        const size_t off_w = head == kKernelHead ? off_wk_ : off_wf_;
        const size_t off_b = head == kKernelHead ? off_bk_ : off_bf_;

        // d(log p[action])/d(logit_a) = 1[a==action] - p_a
        for (int a = 0; a < n_out; ++a) {
            const double dlogit =
                scale * ((a == action ? 1.0 : 0.0) - cache.probs[static_cast<size_t>(a)]);
            grad[off_b + static_cast<size_t>(a)] += dlogit;
            const double* w = theta_.data() + off_w + static_cast<size_t>(a) * H;
            double* gw = grad.data() + off_w + static_cast<size_t>(a) * H;
            for (int k = 0; k < H; ++k) {
                gw[k] += dlogit * cache.h[static_cast<size_t>(k)];
                dh[static_cast<size_t>(k)] += dlogit * w[k];
            }
        }

        // through the LSTM cell
        std::vector<double> dpre(static_cast<size_t>(4 * H));
        for (int j = 0; j < H; ++j) {
            const double i = cache.gi[static_cast<size_t>(j)];
            const double f = cache.gf[static_cast<size_t>(j)];
            const double g = cache.gg[static_cast<size_t>(j)];
            const double o = cache.go[static_cast<size_t>(j)];
            const double tc = cache.tanh_c[static_cast<size_t>(j)];
            const double dhj = dh[static_cast<size_t>(j)];
            const double do_ = dhj * tc;
            const double dcj = dc[static_cast<size_t>(j)] + dhj * o * (1.0 - tc * tc);
            const double di = dcj * g;
            const double dg = dcj * i;
            const double df = dcj * cache.c_prev[static_cast<size_t>(j)];
            dpre[static_cast<size_t>(0 * H + j)] = di * i * (1.0 - i);
            dpre[static_cast<size_t>(1 * H + j)] = df * f * (1.0 - f);
            dpre[static_cast<size_t>(2 * H + j)] = dg * (1.0 - g * g);
            dpre[static_cast<size_t>(3 * H + j)] = do_ * o * (1.0 - o);
            dc[static_cast<size_t>(j)] = dcj * f;  // carried to step t-1
        }

        std::fill(dh.begin(), dh.end(), 0.0);
        const double* x = cache.prev_global < 0
                              ? nullptr
                              : theta_.data() + off_emb_ + static_cast<size_t>(cache.prev_global) * E;
        double* dx = cache.prev_global < 0
                         ? nullptr
                         : grad.data() + off_emb_ + static_cast<size_t>(cache.prev_global) * E;
        for (int row = 0; row < 4 * H; ++row) {
            const double d = dpre[static_cast<size_t>(row)];
            if (d == 0.0) continue;
            grad[off_b_ + static_cast<size_t>(row)] += d;
            if (x != nullptr) {
                const double* wx = theta_.data() + off_wx_ + static_cast<size_t>(row) * E;
                double* gwx = grad.data() + off_wx_ + static_cast<size_t>(row) * E;
                for (int e = 0; e < E; ++e) {
                    gwx[e] += d * x[e];
                    dx[e] += d * wx[e];
                }
            }
            const double* wh = theta_.data() + off_wh_ + static_cast<size_t>(row) * H;
            double* gwh = grad.data() + off_wh_ + static_cast<size_t>(row) * H;
            for (int k = 0; k < H; ++k) {
                gwh[k] += d * cache.h_prev[static_cast<size_t>(k)];
                dh[static_cast<size_t>(k)] += d * wh[k];
            }
        }
    }
}

}  // namespace nnsteal::nas
