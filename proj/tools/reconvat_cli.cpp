// reconvat: semi-supervised music transcription toolkit.
//
// Subcommands: prepare, train, transcribe, evaluate, continual.
// Every command is deterministic under a fixed seed; exit code 0 means the
// requested artifact was fully written.

#include <CLI11.hpp>

#include <reconvat/reconvat.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace reconvat;

namespace {

/// Applies a flat key-value config file to the model/objective/vat configs,
/// rejecting unknown keys.
void apply_config_file(const std::string& path, TranscriberConfig& mcfg,
                       ObjectiveConfig& obj, VatConfig& vcfg,
                       datasets::FrontendConfig& fe) {
    static const std::set<std::string> known{
        "depth",        "base_channels", "attention_window", "two_channel",
        "n_mels",       "alpha",         "use_reconstruction", "use_vat",
        "use_onset",    "recon_loss",    "epsilon",          "xi",
        "power_iterations", "include_onset", "segment_samples", "onset_width"};
    auto kv = config::read_key_values(path);
    for (const auto& [k, v] : kv) {
        if (!known.count(k))
            throw std::runtime_error("unknown config key '" + k + "' in " + path);
        if (k == "depth") mcfg.depth = std::stoi(v);
        else if (k == "base_channels") mcfg.base_channels = std::stoi(v);
        else if (k == "attention_window") mcfg.attention_window = std::stoi(v);
        else if (k == "two_channel") mcfg.two_channel = v == "1" || v == "true";
        else if (k == "n_mels") { mcfg.n_mels = std::stoi(v); fe.n_mels = mcfg.n_mels; }
        else if (k == "alpha") obj.alpha = std::stod(v);
        else if (k == "use_reconstruction") obj.use_reconstruction = v == "1" || v == "true";
        else if (k == "use_vat") obj.use_vat = v == "1" || v == "true";
        else if (k == "use_onset") obj.use_onset = v == "1" || v == "true";
        else if (k == "recon_loss") {
            if (v == "bce") obj.recon_loss_kind = ReconLossKind::bce;
            else if (v == "mse") obj.recon_loss_kind = ReconLossKind::mse;
            else throw std::runtime_error("recon_loss must be bce or mse, got " + v);
        }
        else if (k == "epsilon") vcfg.epsilon = std::stod(v);
        else if (k == "xi") vcfg.xi = std::stod(v);
        else if (k == "power_iterations") vcfg.power_iterations = std::stoi(v);
        else if (k == "include_onset") vcfg.include_onset = v == "1" || v == "true";
        else if (k == "segment_samples") fe.segment_samples = std::stoi(v);
        else if (k == "onset_width") fe.onset_width = std::stoi(v);
    }
}

int cmd_prepare(bool synthetic, const std::string& scan_root, const std::string& layout,
                const std::string& out_dir, int clips, uint64_t seed,
                const std::string& exclude_file, const std::string& manifest_out) {
    CorpusManifest m;
    if (synthetic) {
        SyntheticSpec spec;
        spec.n_clips = clips;
        spec.seed = seed;
        m = datasets::generate_synthetic_corpus(spec, out_dir);
        std::cout << "generated " << m.labelled.size() << " clips under " << out_dir << "\n";
    } else {
        std::set<std::string> exclude;
        if (!exclude_file.empty()) exclude = datasets::read_exclusion_list(exclude_file);
        CorpusLayout lay =
            layout == "musicnet_like" ? CorpusLayout::musicnet_like : CorpusLayout::maps_like;
        m = datasets::scan_corpus(scan_root, lay, exclude);
        std::cout << "scanned " << scan_root << ": " << m.labelled.size() << " labelled, "
                  << m.unlabelled.size() << " unlabelled\n";
    }
    std::string mpath = manifest_out.empty()
                            ? (fs::path(out_dir.empty() ? scan_root : out_dir) / "manifest.tsv")
                                  .string()
                            : manifest_out;
    datasets::write_manifest(mpath, m);
    std::cout << "manifest written to " << mpath << "\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& config_path,
              const std::string& checkpoint_path, const std::string& log_path,
              long iterations, uint64_t seed, bool no_vat, bool no_recon, bool no_onset,
              double validation_fraction, int nl, int nul) {
    TranscriberConfig mcfg;
    ObjectiveConfig obj;
    VatConfig vcfg;
    datasets::FrontendConfig fe;
    if (!config_path.empty()) apply_config_file(config_path, mcfg, obj, vcfg, fe);
    if (no_vat) obj.use_vat = false;
    if (no_recon) obj.use_reconstruction = false;
    if (no_onset) {
        obj.use_onset = false;
        vcfg.include_onset = false;
        mcfg.two_channel = false;
    }

    CorpusManifest m = datasets::read_manifest(manifest_path);
    auto [train_lab, val_lab] = validation_fraction > 0.0 && m.labelled.size() > 1
                                    ? training::split_train_validation(
                                          m.labelled, 1.0 - validation_fraction, seed)
                                    : std::make_pair(m.labelled,
                                                     decltype(m.labelled){});
    CorpusManifest train_m;
    train_m.labelled = train_lab;
    train_m.unlabelled = m.unlabelled;

    datasets::BatchSpec bs;
    bs.labelled_batch_size = nl;
    bs.unlabelled_batch_size = m.unlabelled.empty() ? 0 : nul;

    auto st = training::TrainerState::fresh(mcfg, obj, vcfg, seed);
    datasets::BatchSampler sampler(train_m, bs, fe, seed);
    training::LoopOptions opts;
    opts.iterations = iterations;
    opts.checkpoint_path = checkpoint_path;
    opts.log_path = log_path;
    training::run_training(st, sampler, val_lab, opts);
    std::cout << "trained " << iterations << " iterations; checkpoint at " << checkpoint_path
              << "\n";
    return 0;
}

int cmd_transcribe(const std::string& audio_path, const std::string& checkpoint_path,
                   const std::string& out_tsv, const std::string& plot_path,
                   double threshold) {
    auto st = training::load_checkpoint(checkpoint_path);
    AudioClip clip = audio::read_wav(audio_path);
    datasets::FrontendConfig fe;
    fe.n_mels = st.model_cfg.n_mels;
    auto notes = inference::transcribe_clip(clip, st.theta, st.model_cfg, fe, threshold);
    labels::write_notes_tsv(out_tsv, notes);
    std::cout << "wrote " << notes.size() << " notes to " << out_tsv << "\n";

    if (!plot_path.empty()) {
        AudioClip at16 = clip.sample_rate == audio::kTargetRate
                             ? clip
                             : audio::resample(clip, audio::kTargetRate);
        MelSpectrogram spec = audio::log_normalize(
            audio::mel_spectrogram(at16, fe.window, fe.hop, fe.n_mels));
        auto post =
            inference::transcribe_windows(spec.values, st.theta, st.model_cfg,
                                          fe.segment_frames());
        PianoRoll roll = labels::binarize(post.post, threshold);
        if (st.model_cfg.two_channel) {
            PianoRoll onset_bin = labels::binarize(post.onset, threshold);
            plot::write_roll_ppm(plot_path, roll.values, &onset_bin.values);
        } else {
            plot::write_roll_ppm(plot_path, roll.values);
        }
        std::cout << "piano-roll figure written to " << plot_path << "\n";
    }
    return 0;
}

int cmd_evaluate(const std::vector<std::string>& pred_paths,
                 const std::vector<std::string>& ref_paths) {
    if (pred_paths.size() != ref_paths.size())
        throw std::runtime_error("evaluate: prediction/reference count mismatch (" +
                                 std::to_string(pred_paths.size()) + " vs " +
                                 std::to_string(ref_paths.size()) + ")");
    if (pred_paths.empty()) throw std::runtime_error("evaluate: no input files");

    std::vector<ScoreTriple> frame, note, note_off;
    for (size_t i = 0; i < pred_paths.size(); ++i) {
        auto pred = labels::read_notes_tsv(pred_paths[i]);
        auto ref = labels::read_notes_tsv(ref_paths[i]);
        double end = 0.0;
        for (const auto& n : pred) end = std::max(end, n.offset);
        for (const auto& n : ref) end = std::max(end, n.offset);
        auto t_frames = static_cast<Eigen::Index>(std::ceil(end * kFrameRate)) + 1;
        auto [pr, po] = labels::notes_to_rolls(pred, t_frames, kFrameRate, 1);
        auto [rr, ro] = labels::notes_to_rolls(ref, t_frames, kFrameRate, 1);
        frame.push_back(metrics::frame_metrics(pr, rr));
        note.push_back(metrics::note_metrics(pred, ref));
        note_off.push_back(metrics::note_offset_metrics(pred, ref));
        std::cout << pred_paths[i] << "\tframe_f1=" << std::fixed << std::setprecision(1)
                  << frame.back().f1 * 100.0 << "\tnote_f1=" << note.back().f1 * 100.0
                  << "\tnote_offset_f1=" << note_off.back().f1 * 100.0 << "\n";
    }
    auto print_family = [](const std::string& name, const metrics::CorpusReport& r) {
        std::cout << name << "\tP " << metrics::format_percent(r.precision) << "\tR "
                  << metrics::format_percent(r.recall) << "\tF1 "
                  << metrics::format_percent(r.f1) << "\n";
    };
    std::cout << "---\n";
    print_family("frame", metrics::corpus_report(frame));
    print_family("note", metrics::corpus_report(note));
    print_family("note_w_offset", metrics::corpus_report(note_off));
    return 0;
}

int cmd_continual(const std::string& checkpoint_path, const std::string& manifest_path,
                  const std::string& new_unlabelled_dir, long epochs,
                  const std::string& out_checkpoint, uint64_t seed, int nl, int nul) {
    CorpusManifest base = datasets::read_manifest(manifest_path);
    std::vector<std::string> fresh;
    if (!new_unlabelled_dir.empty()) {
        auto scanned = datasets::scan_corpus(new_unlabelled_dir, CorpusLayout::maps_like);
        for (const auto& [a, l] : scanned.labelled) fresh.push_back(a);  // labels ignored
        for (const auto& a : scanned.unlabelled) fresh.push_back(a);
    }
    std::cout << "unlabelled pool: " << base.unlabelled.size() << " existing + "
              << fresh.size() << " new\n";

    auto probe = training::load_checkpoint(checkpoint_path);
    datasets::FrontendConfig fe;
    fe.n_mels = probe.model_cfg.n_mels;
    datasets::BatchSpec bs;
    bs.labelled_batch_size = nl;
    bs.unlabelled_batch_size = nul;
    auto st = training::continual_train(checkpoint_path, base, fresh, epochs, bs, fe, seed,
                                        probe.model_cfg);
    training::save_checkpoint(out_checkpoint, st);
    std::cout << "resumed to iteration " << st.iteration << "; checkpoint at "
              << out_checkpoint << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reconvat: semi-supervised music transcription"};
    app.require_subcommand(1);

    // prepare
    auto* prep = app.add_subcommand("prepare", "generate or scan a corpus and write a manifest");
    bool synthetic = false;
    std::string scan_root, layout = "maps_like", out_dir, exclude_file, manifest_out;
    int clips = 10;
    uint64_t seed = 0;
    prep->add_flag("--synthetic", synthetic, "generate a synthetic corpus");
    prep->add_option("--scan", scan_root, "scan an existing corpus tree");
    prep->add_option("--layout", layout, "maps_like | musicnet_like")
        ->check(CLI::IsMember({"maps_like", "musicnet_like"}));
    prep->add_option("--out", out_dir, "output directory for synthetic clips");
    prep->add_option("--clips", clips, "number of synthetic clips");
    prep->add_option("--seed", seed, "generation seed");
    prep->add_option("--exclude", exclude_file, "exclusion list (one filename per line)");
    prep->add_option("--manifest", manifest_out, "manifest output path");

    // train
    auto* train = app.add_subcommand("train", "train a model from a manifest");
    std::string manifest_path, config_path, checkpoint_path = "model.ckpt",
                               log_path = "metrics.tsv";
    long iterations = 100;
    uint64_t train_seed = 0;
    bool no_vat = false, no_recon = false, no_onset = false;
    double val_fraction = 0.0;
    int nl = 8, nul = 8;
    train->add_option("--manifest", manifest_path, "corpus manifest")->required();
    train->add_option("--config", config_path, "key-value config file");
    train->add_option("--checkpoint", checkpoint_path, "checkpoint output path");
    train->add_option("--log", log_path, "per-epoch metrics log path");
    train->add_option("--iterations", iterations, "training iterations");
    train->add_option("--seed", train_seed, "training seed");
    train->add_flag("--no-vat", no_vat, "disable virtual adversarial training");
    train->add_flag("--no-recon", no_recon, "disable the reconstruction branch");
    train->add_flag("--no-onset", no_onset, "single-channel model without onset head");
    train->add_option("--validation-fraction", val_fraction,
                      "labelled fraction held out for validation");
    train->add_option("--labelled-batch", nl, "labelled batch size N_l");
    train->add_option("--unlabelled-batch", nul, "unlabelled batch size N_ul");

    // transcribe
    auto* tr = app.add_subcommand("transcribe", "transcribe audio to a note tsv");
    std::string audio_path, t_checkpoint, out_tsv = "notes.tsv", plot_path;
    double threshold = 0.5;
    tr->add_option("--audio", audio_path, "input WAV")->required();
    tr->add_option("--checkpoint", t_checkpoint, "trained checkpoint")->required();
    tr->add_option("--out", out_tsv, "output note tsv");
    tr->add_option("--plot", plot_path, "write a piano-roll PPM figure");
    tr->add_option("--threshold", threshold, "binarization threshold");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score prediction tsvs against references");
    std::vector<std::string> pred_paths, ref_paths;
    ev->add_option("--pred", pred_paths, "prediction tsv files")->required();
    ev->add_option("--ref", ref_paths, "reference tsv files")->required();

    // continual
    auto* co = app.add_subcommand("continual", "resume training with new unlabelled audio");
    std::string c_checkpoint, c_manifest, new_dir, c_out = "continued.ckpt";
    long c_epochs = 1;
    uint64_t c_seed = 0;
    int c_nl = 8, c_nul = 8;
    co->add_option("--checkpoint", c_checkpoint, "input checkpoint")->required();
    co->add_option("--manifest", c_manifest, "base corpus manifest")->required();
    co->add_option("--new-unlabelled", new_dir, "directory of new unlabelled WAVs");
    co->add_option("--epochs", c_epochs, "extra epochs to train");
    co->add_option("--out", c_out, "output checkpoint path");
    co->add_option("--seed", c_seed, "sampler seed");
    co->add_option("--labelled-batch", c_nl, "labelled batch size N_l");
    co->add_option("--unlabelled-batch", c_nul, "unlabelled batch size N_ul");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*prep) {
            if (!synthetic && scan_root.empty())
                throw std::runtime_error("prepare: pass --synthetic or --scan");
            if (synthetic && out_dir.empty())
                throw std::runtime_error("prepare: --synthetic requires --out");
            return cmd_prepare(synthetic, scan_root, layout, out_dir, clips, seed,
                               exclude_file, manifest_out);
        }
        if (*train)
            return cmd_train(manifest_path, config_path, checkpoint_path, log_path,
                             iterations, train_seed, no_vat, no_recon, no_onset,
                             val_fraction, nl, nul);
        if (*tr) return cmd_transcribe(audio_path, t_checkpoint, out_tsv, plot_path, threshold);
        if (*ev) return cmd_evaluate(pred_paths, ref_paths);
        if (*co)
            return cmd_continual(c_checkpoint, c_manifest, new_dir, c_epochs, c_out, c_seed,
                                 c_nl, c_nul);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
