#include "nnsteal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nnsteal::cli {

namespace {

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nn::ArchitectureSpec resolve_arch(const nlohmann::json& j, const PipelineConfig& cfg) {
    if (j.contains("preset")) {
        const std::string preset = j.at("preset").get<std::string>();
        const Shape in = cfg.blobs.input_shape;
        if (preset == "vgg-1") return attack::vgg_style_target(1, in, cfg.blobs.num_classes);
        if (preset == "vgg-2") return attack::vgg_style_target(2, in, cfg.blobs.num_classes);
        if (preset == "vgg-3") return attack::vgg_style_target(3, in, cfg.blobs.num_classes);
        if (preset == "fixed-width")
            return attack::fixed_width_arch(j.at("depth").get<int>(), j.at("filters").get<int>(),
                                            j.value("kernel", 3), in, cfg.blobs.num_classes);
        throw ConfigError("unknown target preset '" + preset + "'");
    }
    return nn::arch_from_json(j);
}

// Renames this run's finished artifacts to *.partial when a later step fails.
class ArtifactTracker {
public:
    void mark(const std::filesystem::path& p) { written_.push_back(p); }
    void mark_partial() {
        for (const auto& p : written_) {
            std::error_code ec;
            std::filesystem::rename(p, p.string() + ".partial", ec);
        }
    }

private:
    std::vector<std::filesystem::path> written_;
};

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PhaseError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw PhaseError("short write to " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

std::filesystem::path timing_csv_path(const PipelineConfig& c) { return c.out_dir / "timing.csv"; }
std::filesystem::path target_model_path(const PipelineConfig& c) {
    return c.out_dir / "target.nns";
}
std::filesystem::path recon_data_path(const PipelineConfig& c) { return c.out_dir / "recon.nnd"; }
std::filesystem::path attack_json_path(const PipelineConfig& c) {
    return c.out_dir / "attack.json";
}
std::filesystem::path report_json_path(const PipelineConfig& c) {
    return c.out_dir / "report.json";
}
std::filesystem::path search_log_path(const PipelineConfig& c) {
    return c.out_dir / "search_log.csv";
}
std::filesystem::path substitute_model_path(const PipelineConfig& c) {
    return c.out_dir / "substitute.nns";
}
std::filesystem::path defense_json_path(const PipelineConfig& c) {
    return c.out_dir / "defense.json";
}

PipelineConfig load_config(const std::filesystem::path& path, const Overrides& ov) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(std::move(j), ov);
}

PipelineConfig config_from_json(nlohmann::json j, const Overrides& ov) {
    try {
        // overrides become part of the effective config before fingerprinting
        if (ov.seed) j["seed"] = *ov.seed;
        if (ov.out_dir) j["out_dir"] = *ov.out_dir;
        if (ov.timing_mode) j["timing"]["mode"] = *ov.timing_mode;
        if (ov.n_runs) j["timing"]["n_runs"] = *ov.n_runs;
        if (ov.literal_reward) j["search"]["literal_reward"] = *ov.literal_reward;
        if (ov.depth) j["reconstruct"]["depth"] = *ov.depth;
        if (ov.regressors) {
            std::vector<std::string> kinds;
            std::stringstream ss(*ov.regressors);
            std::string item;
            while (std::getline(ss, item, ',')) kinds.push_back(item);
            j["regressor"]["kinds"] = kinds;
        }

        PipelineConfig cfg;
        cfg.raw = j;
        cfg.fingerprint = hex64(fnv1a64(j.dump()));
        cfg.seed = j.value("seed", uint64_t{1});
        cfg.out_dir = j.value("out_dir", std::string("out"));

        if (j.contains("data")) {
            const auto& jd = j.at("data");
            cfg.data_source = jd.value("source", std::string("synthetic-blobs"));
            cfg.blobs.input_shape = Shape{jd.value("height", 8), jd.value("width", 8),
                                          jd.value("channels", 3)};
            cfg.blobs.num_classes = jd.value("num_classes", 4);
            cfg.blobs.n_train = jd.value("train", 400);
            cfg.blobs.n_val = jd.value("val", 0);
            cfg.blobs.n_test = jd.value("test", 200);
            cfg.blobs.noise = jd.value("noise", 0.12);
            cfg.blobs.seed = jd.value("seed", cfg.seed ^ 0xDA7AULL);
            if (jd.contains("cifar_path")) cfg.cifar_path = jd.at("cifar_path").get<std::string>();
            if (jd.contains("idx_images")) cfg.idx_images = jd.at("idx_images").get<std::string>();
            if (jd.contains("idx_labels")) cfg.idx_labels = jd.at("idx_labels").get<std::string>();
        }

        if (j.contains("target")) {
            const auto& jt = j.at("target");
            if (jt.contains("model"))
                cfg.target_model_path = std::filesystem::path(jt.at("model").get<std::string>());
            if (jt.contains("arch")) cfg.target_arch = resolve_arch(jt.at("arch"), cfg);
            if (jt.contains("train")) {
                const auto& tr = jt.at("train");
                cfg.target_epochs = tr.value("epochs", 30);
                cfg.target_lr = tr.value("lr", 0.05);
                cfg.target_batch = tr.value("batch", 8);
            }
        }

        if (j.contains("timing")) {
            const auto& jt = j.at("timing");
            const std::string mode = jt.value("mode", std::string("cost-model"));
            if (mode == "wall")
                cfg.timing_mode = attack::TimingMode::Wall;
            else if (mode == "cost-model")
                cfg.timing_mode = attack::TimingMode::CostModel;
            else
                throw ConfigError("timing mode must be 'wall' or 'cost-model'");
            cfg.n_runs = jt.value("n_runs", 20);
            if (jt.contains("cost_model")) {
                const auto& jc = jt.at("cost_model");
                cfg.cost_model.alpha = jc.value("alpha", 1e-9);
                cfg.cost_model.beta = jc.value("beta", 1e-5);
                cfg.cost_model.gamma = jc.value("gamma", 0.0);
                cfg.cost_model.noise_sigma = jc.value("noise_sigma", 0.0);
                cfg.cost_model.seed = jc.value("seed", cfg.seed ^ 0x71EULL);
                cfg.cost_model.id = jc.value("id", std::string("cm-default"));
            }
        }

        cfg.space.input_shape = cfg.blobs.input_shape;
        cfg.space.num_classes = cfg.blobs.num_classes;
        if (j.contains("space")) {
            const auto& js = j.at("space");
            if (js.contains("depth_range")) {
                cfg.space.depth_min = js.at("depth_range").at(0).get<int>();
                cfg.space.depth_max = js.at("depth_range").at(1).get<int>();
            }
            if (js.contains("kernel_choices"))
                cfg.space.kernel_choices = js.at("kernel_choices").get<std::vector<int>>();
            if (js.contains("filter_choices"))
                cfg.space.filter_choices = js.at("filter_choices").get<std::vector<int>>();
            cfg.space.pool_every = js.value("pool_every", 2);
            cfg.space.min_spatial = js.value("min_spatial", 4);
            cfg.n_archs = js.value("n_archs", 100);
        }

        if (j.contains("recon")) {
            cfg.pool_size = j.at("recon").value("pool_size", 400);
            cfg.membership_threshold = j.at("recon").value("threshold", 0.9);
        }

        if (j.contains("regressor")) {
            const auto& jr = j.at("regressor");
            if (jr.contains("kinds")) {
                cfg.regressor_kinds.clear();
                for (const auto& k : jr.at("kinds"))
                    cfg.regressor_kinds.push_back(
                        regress::kind_from_name(k.get<std::string>()));
            }
            const std::string feats = jr.value("features", std::string("time+params"));
            cfg.feature_set = feats == "time-only" ? regress::FeatureSet::TimeOnly
                                                   : regress::FeatureSet::TimePlusParams;
            cfg.holdout_fraction = jr.value("holdout", 0.25);
        }

        cfg.search.input_shape = cfg.blobs.input_shape;
        cfg.search.num_classes = cfg.blobs.num_classes;
        if (j.contains("search")) {
            const auto& js = j.at("search");
            if (js.contains("kernel_choices"))
                cfg.search.kernel_choices = js.at("kernel_choices").get<std::vector<int>>();
            if (js.contains("filter_choices"))
                cfg.search.filter_choices = js.at("filter_choices").get<std::vector<int>>();
            cfg.search.num_candidates = js.value("num_candidates", 50);
            cfg.search.epochs_per_candidate = js.value("epochs_per_candidate", 20);
            cfg.search.reward_window = js.value("reward_window", 5);
            if (js.contains("clip")) {
                cfg.search.clip_low = js.at("clip").at(0).get<double>();
                cfg.search.clip_high = js.at("clip").at(1).get<double>();
            }
            cfg.search.maxpool_substitution = js.value("maxpool_substitution", true);
            cfg.search.pool_every = js.value("pool_every", 2);
            cfg.search.min_spatial = js.value("min_spatial", 4);
            cfg.search.literal_reward = js.value("literal_reward", false);
            const std::string baseline = js.value("baseline", std::string("ema"));
            cfg.search.baseline = baseline == "none" ? nas::SearchConfig::Baseline::None
                                                     : nas::SearchConfig::Baseline::Ema;
            cfg.search.baseline_decay = js.value("baseline_decay", 0.8);
            cfg.search.controller_lr = js.value("controller_lr", 0.05);
            cfg.search.candidate_lr = js.value("candidate_lr", 0.1);
            cfg.search.candidate_batch = js.value("candidate_batch", 8);
            cfg.search.val_fraction = js.value("val_fraction", 0.2);
        }
        if (j.contains("reconstruct") && j.at("reconstruct").contains("depth"))
            cfg.depth_override = j.at("reconstruct").at("depth").get<int>();

        if (j.contains("defend")) {
            const auto& jd = j.at("defend");
            cfg.defend_mode = jd.value("mode", std::string("dummy-layers"));
            cfg.defend_k = jd.value("k", 3);
            cfg.defend_fraction = jd.value("fraction", 0.3);
            cfg.defend_strategy = jd.value("strategy", std::string("label-flip")) == "time-shift"
                                      ? attack::PoisonStrategy::TimeShift
                                      : attack::PoisonStrategy::LabelFlip;
        }
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
}

namespace {

nn::LabeledDataset load_experiment_data(const PipelineConfig& cfg) {
    if (cfg.data_source == "synthetic-blobs") return attack::load_synthetic_blobs(cfg.blobs);
    if (cfg.data_source == "cifar10-binary") {
        if (cfg.cifar_path.empty() || !std::filesystem::exists(cfg.cifar_path))
            throw ConfigError("data.cifar_path missing or does not exist");
        return attack::load_cifar10_binary(cfg.cifar_path, nn::Split::Train);
    }
    if (cfg.data_source == "idx") {
        if (!std::filesystem::exists(cfg.idx_images) || !std::filesystem::exists(cfg.idx_labels))
            throw ConfigError("data.idx_images / data.idx_labels missing or do not exist");
        return attack::load_idx(cfg.idx_images, cfg.idx_labels, nn::Split::Train);
    }
    throw ConfigError("unknown data source '" + cfg.data_source + "'");
}

nn::TrainedNetwork resolve_target(const PipelineConfig& cfg, bool allow_training) {
    if (cfg.target_model_path) {
        if (!std::filesystem::exists(*cfg.target_model_path))
            throw ConfigError("target model " + cfg.target_model_path->string() +
                              " does not exist");
        return nn::load_network(*cfg.target_model_path);
    }
    const auto saved = target_model_path(cfg);
    if (std::filesystem::exists(saved)) return nn::load_network(saved);
    if (!allow_training)
        throw ConfigError("no target model found; run setup first or set target.model");
    if (!cfg.target_arch) throw ConfigError("config needs target.model or target.arch");

    auto data = load_experiment_data(cfg);
    nn::TrainOptions opt;
    opt.epochs = cfg.target_epochs;
    opt.lr = cfg.target_lr;
    opt.batch_size = cfg.target_batch;
    opt.seed = Rng(cfg.seed).split(10).next_u64();
    auto result = nn::train_supervised(*cfg.target_arch, data, opt);
    return std::move(result.net);
}

// constant-query probe of the target: n_runs timing observations
struct TargetProbe {
    double mean_time = 0.0;
    int n_queries = 0;
};

TargetProbe probe_target(const PipelineConfig& cfg, const nn::TrainedNetwork& target) {
    TargetProbe probe;
    probe.n_queries = cfg.n_runs;
    if (cfg.timing_mode == attack::TimingMode::CostModel) {
        // draw indices disjoint from the setup-phase dataset draws
        constexpr uint64_t kQueryDrawBase = uint64_t{1} << 40;
        double sum = 0.0;
        for (int r = 0; r < cfg.n_runs; ++r)
            sum += timing::simulate_time(target.arch, cfg.cost_model,
                                         kQueryDrawBase + static_cast<uint64_t>(r));
        probe.mean_time = sum / cfg.n_runs;
    } else {
        Tensor input(target.arch.input_shape);
        Rng rng = Rng(cfg.seed).split(11);
        for (auto& v : input.data) v = rng.uniform();
        probe.mean_time = timing::measure_wall(target, input, cfg.n_runs).mean_s;
    }
    return probe;
}

attack::TimingDataset build_attacker_dataset(const PipelineConfig& cfg) {
    const uint64_t ds_seed = Rng(cfg.seed).split(20).next_u64();
    if (cfg.timing_mode == attack::TimingMode::CostModel)
        return attack::build_timing_dataset(cfg.space, cfg.n_archs, cfg.cost_model, cfg.n_runs,
                                            ds_seed);
    return attack::build_timing_dataset_wall(cfg.space, cfg.n_archs, cfg.n_runs, ds_seed, "local");
}

struct AttackOutcome {
    std::string regressor;
    double predicted = 0.0;
    int inferred_depth = 0;
};

std::vector<AttackOutcome> infer_depths(const PipelineConfig& cfg,
                                        const attack::TimingDataset& ds, double mean_time,
                                        int64_t target_params) {
    std::vector<AttackOutcome> out;
    for (auto kind : cfg.regressor_kinds) {
        auto reg = regress::Regressor::fit(kind, ds, cfg.feature_set, cfg.hyper,
                                           Rng(cfg.seed).split(30).next_u64());
        AttackOutcome o;
        o.regressor = regress::kind_name(kind);
        o.predicted = reg.predict(mean_time, target_params);
        o.inferred_depth = reg.infer_depth(mean_time, target_params);
        out.push_back(o);
    }
    return out;
}

}  // namespace

void run_setup(const PipelineConfig& cfg) {
    ArtifactTracker tracker;
    try {
        std::filesystem::create_directories(cfg.out_dir);

        // target model (trained here unless supplied)
        auto target = resolve_target(cfg, /*allow_training=*/true);
        save_network(target, target_model_path(cfg));
        tracker.mark(target_model_path(cfg));

        // attacker timing dataset
        auto ds = build_attacker_dataset(cfg);
        write_timing_csv(ds, timing_csv_path(cfg));
        tracker.mark(timing_csv_path(cfg));
        if (!ds.complete)
            throw PhaseError("timing dataset incomplete: some probes failed");

        // training-set reconstruction by membership thresholding
        auto pool = attack::sample_blob_pool(cfg.blobs, cfg.pool_size,
                                             Rng(cfg.seed).split(40).next_u64());
        auto recon = attack::reconstruct_training_set(target, pool, cfg.membership_threshold);
        if (recon.size() < 8)
            throw PhaseError("membership reconstruction returned too few samples (" +
                             std::to_string(recon.size()) + ")");
        attack::save_labeled_dataset(recon, recon_data_path(cfg));
        tracker.mark(recon_data_path(cfg));

        std::cout << "setup: wrote " << timing_csv_path(cfg).string() << " ("
                  << ds.samples.size() << " rows), " << recon_data_path(cfg).string() << " ("
                  << recon.size() << " samples), " << target_model_path(cfg).string() << "\n";
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        tracker.mark_partial();
        throw PhaseError(e.what());
    }
}

void run_attack(const PipelineConfig& cfg) {
    if (!std::filesystem::exists(timing_csv_path(cfg)))
        throw ConfigError("no timing dataset at " + timing_csv_path(cfg).string() +
                          "; run setup first");
    auto ds = attack::read_timing_csv(timing_csv_path(cfg));
    auto target = resolve_target(cfg, /*allow_training=*/false);
    const auto probe = probe_target(cfg, target);
    const auto outcomes =
        infer_depths(cfg, ds, probe.mean_time, nn::param_count(target.arch));

    nlohmann::json j;
    j["mean_time_s"] = probe.mean_time;
    j["n_queries"] = probe.n_queries;
    j["true_depth"] = nn::depth(target.arch);
    j["config_fingerprint"] = cfg.fingerprint;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& o : outcomes) {
        results.push_back({{"regressor", o.regressor},
                           {"predicted", o.predicted},
                           {"inferred_depth", o.inferred_depth}});
        std::cout << "attack: " << o.regressor << " predicted " << o.predicted
                  << " -> depth " << o.inferred_depth << " (queries: " << probe.n_queries
                  << ")\n";
    }
    j["results"] = results;
    j["inferred_depth"] = outcomes.front().inferred_depth;
    write_json_file(j, attack_json_path(cfg));
}

void run_reconstruct(const PipelineConfig& cfg) {
    if (!std::filesystem::exists(recon_data_path(cfg)))
        throw ConfigError("no reconstruction dataset at " + recon_data_path(cfg).string() +
                          "; run setup first");
    auto recon = attack::load_labeled_dataset(recon_data_path(cfg));
    auto target = resolve_target(cfg, /*allow_training=*/false);

    int k = 0;
    if (cfg.depth_override) {
        k = *cfg.depth_override;
    } else {
        if (!std::filesystem::exists(attack_json_path(cfg)))
            throw ConfigError("no attack result at " + attack_json_path(cfg).string() +
                              "; run attack first or pass --depth");
        k = read_json_file(attack_json_path(cfg)).at("inferred_depth").get<int>();
    }

    nas::SearchConfig search = cfg.search;
    search.k = k;
    search.input_shape = target.arch.input_shape;
    search.num_classes = target.num_classes();

    auto result = nas::run_search(search, recon, Rng(cfg.seed).split(50).next_u64());
    nas::write_search_log_csv(result.log, search_log_path(cfg));

    nlohmann::json report;
    report["inferred_depth"] = k;
    report["true_depth"] = nn::depth(target.arch);
    report["regressor_kind"] = regress::kind_name(cfg.regressor_kinds.front());
    report["config_fingerprint"] = cfg.fingerprint;
    report["seeds"] = {{"root", cfg.seed}};
    report["search_failed"] = !result.best_net.has_value();

    if (result.best_net) {
        save_network(*result.best_net, substitute_model_path(cfg));
        auto data = load_experiment_data(cfg);
        const double target_acc = nn::evaluate(target, data, nn::Split::Test);
        const double sub_acc = nn::evaluate(*result.best_net, data, nn::Split::Test);
        std::vector<Tensor> test_inputs;
        for (size_t i : data.indices_of(nn::Split::Test)) test_inputs.push_back(data.inputs[i]);
        const double agree = nn::agreement(target, *result.best_net, test_inputs);

        report["target_test_acc"] = target_acc;
        report["substitute_test_acc"] = sub_acc;
        report["accuracy_gap"] = std::abs(target_acc - sub_acc);
        report["agreement"] = agree;
        report["substitute_arch_id"] = "cand-best";
        report["substitute_arch"] = nn::arch_to_json(result.best_arch);
        report["substitute_val_acc"] = result.best_val_acc;
        std::cout << "reconstruct: target acc " << target_acc << ", substitute acc " << sub_acc
                  << ", gap " << std::abs(target_acc - sub_acc) << ", agreement " << agree << "\n";
    }
    write_json_file(report, report_json_path(cfg));
}

void run_defend(const PipelineConfig& cfg) {
    if (!std::filesystem::exists(timing_csv_path(cfg)))
        throw ConfigError("no timing dataset at " + timing_csv_path(cfg).string() +
                          "; run setup first");
    auto ds = attack::read_timing_csv(timing_csv_path(cfg));
    auto target = resolve_target(cfg, /*allow_training=*/false);

    nlohmann::json j;
    j["mode"] = cfg.defend_mode;
    j["config_fingerprint"] = cfg.fingerprint;
    j["true_depth"] = nn::depth(target.arch);

    if (cfg.defend_mode == "dummy-layers") {
        const auto baseline_probe = probe_target(cfg, target);
        const auto baseline =
            infer_depths(cfg, ds, baseline_probe.mean_time, nn::param_count(target.arch));

        auto padded = timing::pad_with_dummy_layers(target, cfg.defend_k);
        const auto padded_probe = probe_target(cfg, padded);
        // the adversary predicts from what it can observe on the padded model
        const auto attacked =
            infer_depths(cfg, ds, padded_probe.mean_time, nn::param_count(padded.arch));

        j["k"] = cfg.defend_k;
        j["inferred_before"] = baseline.front().inferred_depth;
        j["inferred_after"] = attacked.front().inferred_depth;
        j["depth_shift"] = attacked.front().inferred_depth - baseline.front().inferred_depth;
        std::cout << "defend dummy-layers k=" << cfg.defend_k << ": inferred "
                  << baseline.front().inferred_depth << " -> " << attacked.front().inferred_depth
                  << "\n";
    } else if (cfg.defend_mode == "poison") {
        const uint64_t split_seed = Rng(cfg.seed).split(60).next_u64();
        auto [train, hold] = regress::split_dataset(ds, cfg.holdout_fraction, split_seed);
        auto poisoned = attack::poison_timing_dataset(train, cfg.defend_fraction,
                                                      cfg.defend_strategy,
                                                      Rng(cfg.seed).split(61).next_u64());
        const auto kind = cfg.regressor_kinds.front();
        const uint64_t fit_seed = Rng(cfg.seed).split(30).next_u64();
        auto clean_reg = regress::Regressor::fit(kind, train, cfg.feature_set, cfg.hyper, fit_seed);
        auto poisoned_reg =
            regress::Regressor::fit(kind, poisoned, cfg.feature_set, cfg.hyper, fit_seed);
        const auto clean_score = regress::score(clean_reg, hold);
        const auto poisoned_score = regress::score(poisoned_reg, hold);

        const auto probe = probe_target(cfg, target);
        const int64_t tp = nn::param_count(target.arch);
        j["fraction"] = cfg.defend_fraction;
        j["strategy"] =
            cfg.defend_strategy == attack::PoisonStrategy::LabelFlip ? "label-flip" : "time-shift";
        j["clean_holdout_mse"] = clean_score.mse;
        j["poisoned_holdout_mse"] = poisoned_score.mse;
        j["inferred_before"] = clean_reg.infer_depth(probe.mean_time, tp);
        j["inferred_after"] = poisoned_reg.infer_depth(probe.mean_time, tp);
        std::cout << "defend poison " << cfg.defend_fraction << ": holdout MSE "
                  << clean_score.mse << " -> " << poisoned_score.mse << "\n";
    } else {
        throw ConfigError("unknown defend mode '" + cfg.defend_mode + "'");
    }
    write_json_file(j, defense_json_path(cfg));
}

void run_report(const PipelineConfig& cfg, bool verify) {
    if (!std::filesystem::exists(report_json_path(cfg)))
        throw ConfigError("no report at " + report_json_path(cfg).string());
    auto report = read_json_file(report_json_path(cfg));
    std::cout << report.dump(2) << "\n";
    if (!verify) return;

    auto target = resolve_target(cfg, /*allow_training=*/false);
    auto substitute = nn::load_network(substitute_model_path(cfg));
    auto data = load_experiment_data(cfg);
    const double target_acc = nn::evaluate(target, data, nn::Split::Test);
    const double sub_acc = nn::evaluate(substitute, data, nn::Split::Test);
    std::vector<Tensor> test_inputs;
    for (size_t i : data.indices_of(nn::Split::Test)) test_inputs.push_back(data.inputs[i]);
    const double agree = nn::agreement(target, substitute, test_inputs);

    if (report.at("target_test_acc").get<double>() != target_acc ||
        report.at("substitute_test_acc").get<double>() != sub_acc ||
        report.at("accuracy_gap").get<double>() != std::abs(target_acc - sub_acc) ||
        report.at("agreement").get<double>() != agree)
        throw PhaseError("report does not match recomputation from persisted models");
    std::cout << "report verified: accuracies, gap and agreement match recomputation exactly\n";
}

}  // namespace nnsteal::cli
