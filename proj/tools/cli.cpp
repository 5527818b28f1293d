#include "cli.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "svs/align.h"
#include "svs/config.h"
#include "svs/dsp.h"
#include "svs/error.h"
#include "svs/formats.h"
#include "svs/objectives.h"
#include "svs/regulator.h"
#include "svs/score.h"
#include "svs/synth.h"

namespace svs::cli {

namespace fs = std::filesystem;

namespace {

// Any failure caused by input data; message already carries file:line context.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename Parser>
auto parse_file(const fs::path& path, Parser&& parser) {
  const std::string text = read_file(path);
  try {
    return parser(text);
  } catch (const ParseError& e) {
    std::string where = path.string() + ":" + std::to_string(e.line());
    if (e.column() > 0) where += ":" + std::to_string(e.column());
    throw DataError(where + ": " + to_string(e.kind()) + " error: " + e.detail());
  } catch (const Error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Collects every output of a command and writes them only at the end, each
// through a temporary file in the destination directory followed by a rename.
class OutputSet {
 public:
  void add(fs::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }

  void commit() {
    std::vector<fs::path> temps;
    auto cleanup = [&temps] {
      std::error_code ec;
      for (const auto& t : temps) fs::remove(t, ec);
    };
    try {
      for (const auto& [path, content] : files_) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        fs::path temp = path;
        temp += ".tmp-" + std::to_string(::getpid());
        temps.push_back(temp);
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) throw DataError(path.string() + ": write failed");
      }
      for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temps[i], files_[i].first);
    } catch (const fs::filesystem_error& e) {
      cleanup();
      throw DataError(e.what());
    } catch (...) {
      cleanup();
      throw;
    }
  }

  const std::vector<std::pair<fs::path, std::string>>& files() const { return files_; }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

PipelineConfig load_config(const CommonOptions& common) {
  PipelineConfig config;
  if (!common.config_path.empty()) {
    config = parse_file(common.config_path, [](const std::string& t) { return parse_pipeline_config(t); });
  }
  if (common.seed) config.synth.seed = *common.seed;
  return config;
}

const Score& select_utterance(const std::vector<Score>& scores, const std::string& utt,
                              const std::string& path) {
  if (scores.empty()) throw DataError(path + ": no utterances");
  if (utt.empty()) {
    if (scores.size() != 1) {
      throw UsageError(path + " holds " + std::to_string(scores.size()) +
                       " utterances; choose one with --utt");
    }
    return scores.front();
  }
  for (const Score& s : scores) {
    if (s.utt_id == utt) return s;
  }
  throw DataError(path + ": no utterance '" + utt + "'");
}

std::vector<Score> load_scores(const std::string& path) {
  return parse_file(path, [](const std::string& t) { return parse_score_document(t); });
}

std::string nine_digits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

template <typename F>
auto with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw DataError(context + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct ParseArgs {
  std::string score;
  bool spans = false;
};

void cmd_parse(const ParseArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const auto scores = load_scores(a.score);
  std::ostringstream buf;
  for (const Score& s : scores) {
    buf << format_score(s) << '\n';
    if (a.spans) {
      const NoteFrameSpans spans = with_context(a.score + ": " + s.utt_id, [&] {
        return note_frame_boundaries(s, config.mel.sample_rate, config.mel.hop);
      });
      buf << "SPANS " << s.utt_id;
      for (const FrameSpan& span : spans.spans) buf << ' ' << span.start << ':' << span.end;
      buf << '\n';
    }
  }
  out << buf.str();
}

struct MelArgs {
  std::string wav;
};

void cmd_mel(const MelArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const Wav wav = parse_file(a.wav, [](const std::string& t) { return parse_wav(t); });
  if (wav.sample_rate != config.mel.sample_rate) {
    throw DataError(a.wav + ": sample rate " + std::to_string(wav.sample_rate) +
                    " Hz differs from mel.sample_rate " + format_number(config.mel.sample_rate));
  }
  const MelSpectrogram mel =
      with_context(a.wav, [&] { return mel_spectrogram(wav.samples, config.mel); });
  OutputSet outputs;
  outputs.add(fs::path(common.out_dir) / (fs::path(a.wav).stem().string() + ".mel"), format_mel(mel));
  outputs.commit();
  out << outputs.files().front().first.string() << '\n';
}

struct SmoothArgs {
  std::string f0;
  std::optional<int> kernel;
};

void cmd_smooth(const SmoothArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const F0Contour f0 = parse_file(a.f0, [](const std::string& t) { return parse_f0(t); });
  const int kernel = a.kernel.value_or(config.median_kernel);
  const F0Contour smooth = with_context(a.f0, [&] { return median_smooth_f0(f0, kernel); });
  OutputSet outputs;
  outputs.add(fs::path(common.out_dir) / (fs::path(a.f0).stem().string() + ".smooth.f0"),
              format_f0(smooth));
  outputs.commit();
  out << outputs.files().front().first.string() << '\n';
}

struct AlignArgs {
  std::string latents;
  std::string prior;
  std::string score;
  std::string utt;
  bool unbounded = false;
};

void cmd_align(const AlignArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const Matrix latents = parse_file(a.latents, [](const std::string& t) { return parse_matrix(t); });
  const GaussianSeq prior = parse_file(a.prior, [](const std::string& t) { return parse_gaussians(t); });
  const auto scores = load_scores(a.score);
  const Score& score = select_utterance(scores, a.utt, a.score);

  const auto [durations, objective] = with_context(score.utt_id, [&] {
    if (static_cast<std::size_t>(prior.size()) != score.phonemes.size()) {
      throw ValidationError("prior has " + std::to_string(prior.size()) + " rows for " +
                            std::to_string(score.phonemes.size()) + " phonemes");
    }
    const LogLikMatrix loglik = gaussian_loglik_matrix(latents, prior);
    Durations d;
    if (a.unbounded) {
      d = mas(loglik);
    } else {
      const NoteFrameSpans spans =
          note_frame_boundaries(score, config.mel.sample_rate, config.mel.hop);
      d = mas_note_bounded(loglik, score.phoneme_note_idx, spans);
    }
    return std::pair{d, alignment_score(loglik, d)};
  });

  OutputSet outputs;
  outputs.add(fs::path(common.out_dir) / (score.utt_id + ".dur"), format_durations(durations));
  outputs.commit();
  out << score.utt_id << " objective " << nine_digits(objective) << '\n';
}

struct RegulateArgs {
  std::string score;
  std::string pred;
  std::string utt;
};

void cmd_regulate(const RegulateArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const auto scores = load_scores(a.score);
  const Score& score = select_utterance(scores, a.utt, a.score);
  const auto pred = parse_file(a.pred, [](const std::string& t) { return parse_predictions(t); });
  const Durations d = with_context(score.utt_id, [&] {
    const NoteFrameSpans spans = note_frame_boundaries(score, config.mel.sample_rate, config.mel.hop);
    return rhythm_adjust(pred, score.phoneme_note_idx, spans);
  });
  OutputSet outputs;
  outputs.add(fs::path(common.out_dir) / (score.utt_id + ".dur"), format_durations(d));
  outputs.commit();
  out << outputs.files().front().first.string() << '\n';
}

struct LossArgs {
  std::string kl_p_q, kl_p_p;
  std::string kl_l_q, kl_l_p, kl_a_q, kl_a_p;
  std::string f0, f0_pred, f0_smooth_pred;
  std::string mel, mel_pred;
  std::string dur, dur_pred;
  std::optional<double> adv, fm;
};

// All-or-nothing check for a group of related flags.
bool group_present(std::initializer_list<std::pair<const char*, const std::string*>> flags) {
  std::size_t given = 0;
  for (const auto& [name, value] : flags) given += value->empty() ? 0 : 1;
  if (given == 0) return false;
  if (given != flags.size()) {
    std::string names;
    for (const auto& [name, value] : flags) names += std::string(names.empty() ? "" : ", ") + name;
    throw UsageError("flags must be given together: " + names);
  }
  return true;
}

void cmd_losses(const LossArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const LossWeights& w = config.weights;
  auto gauss = [](const std::string& p) {
    return parse_file(p, [](const std::string& t) { return parse_gaussians(t); });
  };
  auto f0_file = [](const std::string& p) {
    return parse_file(p, [](const std::string& t) { return parse_f0(t); });
  };

  LossComponents c;
  std::vector<std::pair<std::string, double>> lines;
  if (a.adv) {
    c.adv = *a.adv;
    lines.emplace_back("adv", c.adv);
  }
  if (a.fm) {
    c.fm = *a.fm;
    lines.emplace_back("fm", c.fm);
  }
  if (group_present({{"--mel", &a.mel}, {"--mel-pred", &a.mel_pred}})) {
    const auto truth = parse_file(a.mel, [](const std::string& t) { return parse_mel(t); });
    const auto pred = parse_file(a.mel_pred, [](const std::string& t) { return parse_mel(t); });
    c.mel = with_context("mel", [&] { return mel_loss(truth.frames, pred.frames).value; });
    lines.emplace_back("mel", c.mel);
  }
  if (group_present({{"--f0", &a.f0}, {"--f0-pred", &a.f0_pred}, {"--f0-smooth-pred", &a.f0_smooth_pred}})) {
    const F0Contour truth = f0_file(a.f0);
    const F0Contour pred = f0_file(a.f0_pred);
    const F0Contour smooth_pred = f0_file(a.f0_smooth_pred);
    c.pitch = with_context("pitch", [&] {
      return pitch_loss(truth, pred.values, smooth_pred.values, w.lambda_s, config.median_kernel).value;
    });
    lines.emplace_back("pitch", c.pitch);
  }
  if (group_present({{"--kl-l-q", &a.kl_l_q}, {"--kl-l-p", &a.kl_l_p},
                     {"--kl-a-q", &a.kl_a_q}, {"--kl-a-p", &a.kl_a_p}})) {
    const auto q_l = gauss(a.kl_l_q), p_l = gauss(a.kl_l_p), q_a = gauss(a.kl_a_q), p_a = gauss(a.kl_a_p);
    c.kl_a = with_context("kl_a", [&] { return kl_aperiodic(q_l, p_l, q_a, p_a, w.lambda_l).value; });
    lines.emplace_back("kl_a", c.kl_a);
  }
  if (group_present({{"--kl-p-q", &a.kl_p_q}, {"--kl-p-p", &a.kl_p_p}})) {
    const auto q = gauss(a.kl_p_q), p = gauss(a.kl_p_p);
    c.kl_p = with_context("kl_p", [&] { return kl_diag_gaussian(q, p).value; });
    lines.emplace_back("kl_p", c.kl_p);
  }
  if (group_present({{"--dur", &a.dur}, {"--dur-pred", &a.dur_pred}})) {
    const Durations truth = parse_file(a.dur, [](const std::string& t) { return parse_durations(t); });
    const auto pred = parse_file(a.dur_pred, [](const std::string& t) { return parse_predictions(t); });
    const std::vector<double> truth_real(truth.d.begin(), truth.d.end());
    c.dur = with_context("dur", [&] { return duration_loss(truth_real, pred).value; });
    lines.emplace_back("dur", c.dur);
  }
  const double total = with_context("final", [&] { return final_loss(c, w); });

  std::ostringstream buf;
  for (const auto& [name, value] : lines) buf << name << ' ' << nine_digits(value) << '\n';
  buf << "final " << nine_digits(total) << '\n';
  out << buf.str();
}

struct GenArgs {
  std::string score;
};

void cmd_gen(const GenArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const auto scores = load_scores(a.score);
  OutputSet outputs;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Score& s = scores[i];
    SynthConfig synth = config.synth;
    synth.seed += i;
    const SynthUtterance u = with_context(a.score + ": " + s.utt_id, [&] { return generate_utterance(s, synth); });
    const fs::path base = fs::path(common.out_dir) / s.utt_id;
    outputs.add(fs::path(base) += ".wav",
                format_wav(Wav{static_cast<int>(synth.sample_rate), u.waveform}));
    outputs.add(fs::path(base) += ".f0", format_f0(u.f0));
    outputs.add(fs::path(base) += ".dur", format_durations(u.durations));
  }
  outputs.commit();
  for (const auto& [path, content] : outputs.files()) out << path.string() << '\n';
}

struct PipelineArgs {
  std::string score;
  bool breath = false;
  double variance_floor = 1e-2;
};

void cmd_pipeline(const PipelineArgs& a, const CommonOptions& common, std::ostream& out) {
  const PipelineConfig config = load_config(common);
  const auto scores = load_scores(a.score);
  OutputSet outputs;
  std::ostringstream report;
  std::size_t total_phonemes = 0, total_within = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Score& s = scores[i];
    with_context(a.score + ": " + s.utt_id, [&] {
      SynthConfig synth = config.synth;
      synth.seed += i;
      const SynthUtterance u = generate_utterance(s, synth);
      std::vector<double> waveform = u.waveform;
      if (a.breath) {
        std::vector<SampleRange> rests;
        const auto hop = static_cast<std::size_t>(synth.hop);
        for (std::size_t n = 0; n < s.notes.size(); ++n) {
          if (!s.notes[n].is_rest()) continue;
          const FrameSpan& span = u.spans.spans[n];
          rests.push_back({span.start * hop, std::min(span.end * hop, waveform.size())});
        }
        waveform = corrupt_with_breath(waveform, rests, synth.seed ^ 0x9e3779b97f4a7c15ULL);
      }

      const MelSpectrogram mel = mel_spectrogram(waveform, config.mel);
      const GaussianSeq prior = fit_segment_gaussians(mel.frames, u.durations, a.variance_floor);
      const LogLikMatrix loglik = gaussian_loglik_matrix(mel.frames, prior);
      const Durations recovered = mas_note_bounded(loglik, s.phoneme_note_idx, u.spans);
      const std::vector<double> as_pred(recovered.d.begin(), recovered.d.end());
      const Durations regulated = rhythm_adjust(as_pred, s.phoneme_note_idx, u.spans);

      std::size_t exact = 0, within = 0;
      for (std::size_t p = 0; p < recovered.size(); ++p) {
        const int diff = std::abs(recovered.d[p] - u.durations.d[p]);
        exact += diff == 0;
        within += diff <= 2;
      }
      total_phonemes += recovered.size();
      total_within += within;
      report << s.utt_id << " frames " << mel.num_frames() << " phonemes " << recovered.size()
             << " exact " << exact << " within2 " << within << " regulator "
             << (regulated == recovered ? "consistent" : "changed") << '\n';
      outputs.add(fs::path(common.out_dir) / (s.utt_id + ".dur"), format_durations(recovered));
      return 0;
    });
  }
  outputs.commit();
  report << "total phonemes " << total_phonemes << " within2 " << total_within << " fraction "
         << nine_digits(total_phonemes ? static_cast<double>(total_within) / total_phonemes : 1.0)
         << '\n';
  out << report.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score parsing, feature extraction, note-bounded alignment, rhythm regulation "
               "and loss evaluation for singing voice synthesis"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "override synth.seed");
    sub->add_option("--out-dir", common.out_dir, "directory for output files");
  };

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "validate and normalize a score file");
  parse->add_option("score", parse_args.score, "score file")->required();
  parse->add_flag("--spans", parse_args.spans, "also print note frame spans");
  add_common(parse);

  MelArgs mel_args;
  auto* mel = app.add_subcommand("mel", "log-mel spectrogram of a mono 16-bit WAV");
  mel->add_option("wav", mel_args.wav, "input WAV")->required();
  add_common(mel);

  SmoothArgs smooth_args;
  auto* smooth = app.add_subcommand("smooth", "median-smooth an F0 contour within voiced runs");
  smooth->add_option("f0", smooth_args.f0, "F0 file")->required();
  smooth->add_option("--kernel", smooth_args.kernel, "odd kernel size (default f0.kernel)");
  add_common(smooth);

  AlignArgs align_args;
  auto* align = app.add_subcommand("align", "note-bounded monotonic alignment search");
  align->add_option("--latents", align_args.latents, "MAT file, one latent row per frame")->required();
  align->add_option("--prior", align_args.prior, "GAUSS file, one Gaussian per phoneme")->required();
  align->add_option("--score", align_args.score, "score file")->required();
  align->add_option("--utt", align_args.utt, "utterance id when the score holds several");
  align->add_flag("--unbounded", align_args.unbounded, "ignore note boundaries");
  add_common(align);

  RegulateArgs regulate_args;
  auto* regulate = app.add_subcommand("regulate", "rescale predicted durations to note lengths");
  regulate->add_option("--score", regulate_args.score, "score file")->required();
  regulate->add_option("--pred", regulate_args.pred, "PRED file of predicted durations")->required();
  regulate->add_option("--utt", regulate_args.utt, "utterance id when the score holds several");
  add_common(regulate);

  LossArgs loss_args;
  auto* losses = app.add_subcommand("losses", "evaluate training objectives and the weighted total");
  losses->add_option("--kl-p-q", loss_args.kl_p_q, "periodic posterior (GAUSS)");
  losses->add_option("--kl-p-p", loss_args.kl_p_p, "periodic prior (GAUSS)");
  losses->add_option("--kl-l-q", loss_args.kl_l_q, "linguistic posterior (GAUSS)");
  losses->add_option("--kl-l-p", loss_args.kl_l_p, "linguistic prior (GAUSS)");
  losses->add_option("--kl-a-q", loss_args.kl_a_q, "detached aperiodic posterior (GAUSS)");
  losses->add_option("--kl-a-p", loss_args.kl_a_p, "aperiodic prior (GAUSS)");
  losses->add_option("--f0", loss_args.f0, "ground-truth F0");
  losses->add_option("--f0-pred", loss_args.f0_pred, "predicted F0");
  losses->add_option("--f0-smooth-pred", loss_args.f0_smooth_pred, "predicted smoothed F0");
  losses->add_option("--mel", loss_args.mel, "ground-truth MEL");
  losses->add_option("--mel-pred", loss_args.mel_pred, "predicted MEL");
  losses->add_option("--dur", loss_args.dur, "ground-truth DUR");
  losses->add_option("--dur-pred", loss_args.dur_pred, "predicted PRED");
  losses->add_option("--adv", loss_args.adv, "precomputed adversarial loss");
  losses->add_option("--fm", loss_args.fm, "precomputed feature-matching loss");
  add_common(losses);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "render synthetic utterances (WAV, F0, DUR)");
  gen->add_option("score", gen_args.score, "score file")->required();
  add_common(gen);

  PipelineArgs pipeline_args;
  auto* pipeline = app.add_subcommand(
      "pipeline", "synthesize, extract mel, align within notes and compare with ground truth");
  pipeline->add_option("score", pipeline_args.score, "score file")->required();
  pipeline->add_flag("--breath", pipeline_args.breath, "replace rest notes with breath noise");
  pipeline->add_option("--variance-floor", pipeline_args.variance_floor,
                       "added to fitted per-phoneme variances")
      ->check(CLI::PositiveNumber);
  add_common(pipeline);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
        out << sub->help();
      }
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (parse->parsed()) cmd_parse(parse_args, common, out);
    else if (mel->parsed()) cmd_mel(mel_args, common, out);
    else if (smooth->parsed()) cmd_smooth(smooth_args, common, out);
    else if (align->parsed()) cmd_align(align_args, common, out);
    else if (regulate->parsed()) cmd_regulate(regulate_args, common, out);
    else if (losses->parsed()) cmd_losses(loss_args, common, out);
    else if (gen->parsed()) cmd_gen(gen_args, common, out);
    else if (pipeline->parsed()) cmd_pipeline(pipeline_args, common, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace svs::cli
