// Copyright 2026 The carsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "carsynth/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "carsynth/array.h"
#include "carsynth/dataset.h"
#include "carsynth/error.h"
#include "carsynth/metrics.h"
#include "carsynth/scene.h"
#include "carsynth/scene_json.h"
#include "carsynth/wav.h"

namespace carsynth {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

struct GlobalOptions {
  std::string root;
  int verbosity = 0;
};

struct SynthOptions {
  std::string spec_file;
  std::string car, setup, p, x, z;
  std::optional<double> ls, la;
  std::optional<int> w, speed, vent, target_rate;
  std::optional<std::uint64_t> seed;
  std::string channels;
  bool no_speech = false;
  std::string out;
  std::string sidecar;
  bool emit_components = false;
  bool float_output = false;
  std::string batch_dir;
  std::string out_dir;
  int jobs = 0;
};

struct MetricsOptions {
  std::string car, setup = "array", p = "driver", condition, format = "csv", out;
  double ls = 60.0;
  bool table = false;
  int channel = -1;
};

struct CalibrateOptions {
  std::string car, setup, recording;
  int channel = 0;
  int recording_channel = -1;
  double ref_dba = 0.0;
};

struct FixtureCliOptions {
  std::uint64_t seed = 1;
  double noise_seconds = 5.0;
  bool identity_irs = false;
};

struct SteeringOptions {
  std::string freqs = "250:8000:250";
  std::string azimuths = "0:355:5";
  std::string car, setup = "array", out;
  int mics = 8;
  double radius = 0.05;
  double speed_of_sound = 343.0;
};

// "a,b,c" or "start:stop:step" (stop inclusive).
std::vector<double> ParseGrid(const std::string& text, const char* what) {
  std::vector<double> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::stringstream ss(text);
      std::string a, b, c;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, c, ':');
      const double start = std::stod(a), stop = std::stod(b), step = std::stod(c);
      if (!(step > 0)) throw InvalidArgument(std::string(what) + ": step must be > 0");
      const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
      for (long i = 0; i < count; ++i) out.push_back(start + i * step);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::invalid_argument&) {
    throw InvalidArgument(std::string(what) + ": cannot parse \"" + text + "\"");
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + ": empty grid");
  return out;
}

std::vector<int> ParseChannels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw InvalidArgument("channels: cannot parse \"" + item + "\"");
    }
  }
  return out;
}

std::string AbsolutePath(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).string();
}

// Spec document from --spec (paths made absolute) overridden by flags.
json BuildSpecDocument(const SynthOptions& o) {
  json doc = json::object();
  if (!o.spec_file.empty()) {
    doc = ReadJsonFile(o.spec_file);
    if (!doc.is_object()) throw InvalidArgument("scene spec must be a JSON object");
    const fs::path base = fs::path(o.spec_file).parent_path();
    for (const char* key : {"x", "z"}) {
      if (doc.contains(key) && doc[key].is_string()) doc[key] = AbsolutePath(base, doc[key].get<std::string>());
    }
  }
  if (!o.car.empty()) doc["car"] = o.car;
  if (!o.setup.empty()) doc["setup"] = o.setup;
  if (!o.p.empty()) doc["p"] = o.p;
  if (o.ls) doc["Ls"] = *o.ls;
  if (o.w) doc["w"] = *o.w;
  if (!o.x.empty()) doc["x"] = o.x;
  if (o.la) doc["La"] = *o.la;
  if (!o.z.empty()) doc["z"] = o.z;
  if (o.speed) doc["s"] = *o.speed;
  if (o.vent) doc["l"] = *o.vent;
  if (!o.channels.empty()) doc["channels"] = ParseChannels(o.channels);
  if (o.target_rate) doc["target_rate"] = *o.target_rate;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.no_speech) doc["speech"] = false;
  if (!doc.contains("seed")) doc["seed"] = kDefaultSeed;
  return doc;
}

void WriteJson(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

// Synthesizes one scene and writes Y, the sidecar and optionally S/A/N/V.
std::vector<std::string> RunScene(const DatasetIndex& index, const json& doc, const fs::path& out_wav,
                                  const fs::path& sidecar, bool emit_components, SampleFormat format) {
  const SceneSpec spec = SceneSpecFromJson(doc, fs::current_path());
  const SceneResult result = Synthesize(index, spec);
  if (out_wav.has_parent_path()) fs::create_directories(out_wav.parent_path());
  WriteWav(out_wav, result.mixture, format);
  WriteJson(sidecar, SceneSidecar(doc, result));
  if (emit_components) {
    const fs::path stem = out_wav.parent_path() / out_wav.stem();
    WriteWav(stem.string() + ".S.wav", result.speech, format);
    WriteWav(stem.string() + ".A.wav", result.audio, format);
    WriteWav(stem.string() + ".N.wav", result.noise, format);
    WriteWav(stem.string() + ".V.wav", result.ventilation, format);
  }
  return result.warnings;
}

int CmdSynth(const GlobalOptions& g, const SynthOptions& o, std::ostream& out, std::ostream& err) {
  const DatasetIndex index = LoadDataset(g.root);
  const SampleFormat format = o.float_output ? SampleFormat::kFloat32 : SampleFormat::kPcm24;

  if (!o.batch_dir.empty()) {
    if (o.out_dir.empty()) throw InvalidArgument("--batch needs --out-dir");
    std::vector<fs::path> specs;
    for (const auto& entry : fs::directory_iterator(o.batch_dir)) {
      if (entry.path().extension() == ".json") specs.push_back(entry.path());
    }
    std::sort(specs.begin(), specs.end());
    fs::create_directories(o.out_dir);
    const unsigned jobs = o.jobs > 0 ? static_cast<unsigned>(o.jobs)
                                     : std::max(1u, std::thread::hardware_concurrency());
    std::mutex io_mu;
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < specs.size(); i = next++) {
        SynthOptions one = o;
        one.spec_file = specs[i].string();
        const fs::path wav = fs::path(o.out_dir) / (specs[i].stem().string() + ".wav");
        try {
          const auto warnings = RunScene(index, BuildSpecDocument(one), wav,
                                         fs::path(o.out_dir) / (specs[i].stem().string() + ".json"),
                                         o.emit_components, format);
          std::lock_guard<std::mutex> lock(io_mu);
          for (const auto& w : warnings) err << "warning: " << specs[i].filename().string() << ": " << w << "\n";
          out << "wrote " << wav.string() << "\n";
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(io_mu);
          err << "error: " << specs[i].string() << ": " << e.what() << "\n";
          ++failures;
        }
      }
    };
    std::vector<std::future<void>> pool;
    for (unsigned j = 0; j < std::min<std::size_t>(jobs, specs.size()); ++j) {
      pool.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : pool) f.get();
    return failures ? kExitUsage : kExitOk;
  }

  if (o.out.empty()) throw InvalidArgument("synth needs --out");
  const json doc = BuildSpecDocument(o);
  const fs::path sidecar = o.sidecar.empty() ? fs::path(o.out + ".json") : fs::path(o.sidecar);
  for (const auto& w : RunScene(index, doc, o.out, sidecar, o.emit_components, format)) {
    err << "warning: " << w << "\n";
  }
  if (g.verbosity > 0) out << "wrote " << o.out << " and " << sidecar.string() << "\n";
  return kExitOk;
}

int CmdMetrics(const GlobalOptions& g, const MetricsOptions& o, std::ostream& out) {
  if (o.table == !o.condition.empty()) throw InvalidArgument("metrics needs exactly one of --table or --condition");
  const DatasetIndex index = LoadDataset(g.root);
  const std::string car = o.car.empty() ? index.cars().at(0).id : o.car;
  const SetupKind setup = ParseSetupKind(o.setup);
  const SourcePosition p = ParseSourcePosition(o.p);
  std::vector<ConditionMetrics> rows;
  if (o.table) {
    rows = ConditionTable(index, car, setup, p, o.ls, o.channel);
  } else {
    rows.push_back(MeasureCondition(index, car, setup, ParseConditionKey(o.condition), p, o.ls, o.channel));
  }
  std::ostringstream text;
  if (o.format == "json") {
    text << MetricsJson(rows).dump(2) << "\n";
  } else if (o.format == "csv") {
    WriteMetricsCsv(text, rows);
  } else {
    throw InvalidArgument("--format must be csv or json");
  }
  if (o.out.empty()) {
    out << text.str();
  } else {
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) throw IoError("cannot write " + o.out);
    f << text.str();
  }
  return kExitOk;
}

int CmdValidate(const GlobalOptions& g, std::ostream& out) {
  LoadOptions lenient;
  lenient.strict = false;
  const DatasetIndex index = LoadDataset(g.root, lenient);
  const ValidationReport report = Validate(index);
  for (const auto& f : report.findings) {
    out << ToString(f.kind) << "\t" << f.car << "/" << f.setup << "\t" << (f.file.empty() ? "-" : f.file)
        << "\t" << f.message << "\n";
  }
  out << report.findings.size() << " findings\n";
  return report.empty() ? kExitOk : kExitFindings;
}

int CmdCalibrate(const GlobalOptions& g, const CalibrateOptions& o, std::ostream& out) {
  const DatasetIndex index = LoadDataset(g.root);
  const std::string car = o.car.empty() ? index.cars().at(0).id : o.car;
  const SetupKind setup = ParseSetupKind(o.setup);
  const Setup& s = index.setup(car, setup);
  if (o.channel < 0 || o.channel >= s.channel_count) {
    throw InvalidArgument("--channel " + std::to_string(o.channel) + " outside 0.." +
                          std::to_string(s.channel_count - 1));
  }
  const AudioBuffer recording = ReadWav(o.recording);
  const int rec_channel =
      o.recording_channel >= 0 ? o.recording_channel : (recording.channel_count() > o.channel ? o.channel : 0);
  if (rec_channel >= recording.channel_count()) {
    throw InvalidArgument("--recording-channel " + std::to_string(rec_channel) + " not in recording");
  }
  const double offset = EstimateSensitivity(recording, rec_channel, o.ref_dba);
  UpdateManifestSensitivity(g.root, car, setup, o.channel, offset);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", offset);
  out << car << "/" << ToString(setup) << " channel " << o.channel << " sensitivity_db = " << buf << "\n";
  return kExitOk;
}

int CmdFixture(const GlobalOptions& g, const FixtureCliOptions& o, std::ostream& out) {
  FixtureOptions opt;
  opt.seed = o.seed;
  opt.noise_seconds = o.noise_seconds;
  opt.identity_irs = o.identity_irs;
  GenerateFixture(g.root, opt);
  out << "fixture written to " << g.root << "\n";
  return kExitOk;
}

int CmdSteering(const GlobalOptions& g, const SteeringOptions& o, std::ostream& out) {
  if (o.out.empty()) throw InvalidArgument("steering needs --out");
  ArrayGeometry geom;
  if (!o.car.empty()) {
    const DatasetIndex index = LoadDataset(g.root);
    geom = GeometryOf(index.setup(o.car, ParseSetupKind(o.setup)));
  } else {
    geom = ArrayGeometry::Circular(o.mics, o.radius, 0.0, o.speed_of_sound);
  }
  const auto freqs = ParseGrid(o.freqs, "--freqs");
  auto az = ParseGrid(o.azimuths, "--azimuths");
  for (double& a : az) a *= kPi / 180.0;
  const SteeringMatrix m = SteeringVectors(geom, freqs, az);
  WriteSteeringMatrix(o.out, m);
  out << "wrote " << m.frequencies_hz.size() << "x" << m.azimuths_rad.size() << "x" << m.mics
      << " steering matrix to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesize multichannel in-car microphone signals from impulse responses and noise"};
  app.require_subcommand(1);
  GlobalOptions g;
  if (const char* env = std::getenv("CAVE_DATASET_ROOT")) g.root = env;
  app.add_option("--root", g.root, "Dataset root (default: $CAVE_DATASET_ROOT)");
  app.add_flag("-v,--verbose", g.verbosity, "More output");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Synthesize Y = S + A + N + V");
  synth->add_option("--spec", so.spec_file, "Scene spec JSON; flags override its fields");
  synth->add_option("--car", so.car);
  synth->add_option("--setup", so.setup, "array | distributed");
  synth->add_option("--p", so.p, "Source position");
  synth->add_option("--ls", so.ls, "Speech effort Ls, dBA");
  synth->add_option("--w", so.w, "Window state 0-3");
  synth->add_option("--x", so.x, "Dry speech WAV");
  synth->add_option("--la", so.la, "Audio program level La, dBA");
  synth->add_option("--z", so.z, "Audio program WAV");
  synth->add_option("--speed", so.speed, "Speed s, km/h");
  synth->add_option("--vent", so.vent, "Ventilation level l, 1-3");
  synth->add_option("--channels", so.channels, "Comma-separated channel subset");
  synth->add_option("--target-rate", so.target_rate, "Output rate in Hz (default 16000)");
  synth->add_option("--seed", so.seed, "Seed for noise offsets");
  synth->add_flag("--no-speech", so.no_speech, "Leave S at zero");
  synth->add_option("--out", so.out, "Output WAV for Y");
  synth->add_option("--sidecar", so.sidecar, "Sidecar JSON (default <out>.json)");
  synth->add_flag("--emit-components", so.emit_components, "Also write S/A/N/V WAVs");
  synth->add_flag("--float", so.float_output, "Write 32-bit float instead of 24-bit PCM");
  synth->add_option("--batch", so.batch_dir, "Directory of scene spec JSON files");
  synth->add_option("--out-dir", so.out_dir, "Output directory for --batch");
  synth->add_option("--jobs", so.jobs, "Parallel scenes for --batch");

  MetricsOptions mo;
  auto* metrics = app.add_subcommand("metrics", "Noise level and SNR at a reference microphone");
  metrics->add_option("--car", mo.car);
  metrics->add_option("--setup", mo.setup);
  metrics->add_option("--p", mo.p);
  metrics->add_option("--ls", mo.ls);
  metrics->add_flag("--table", mo.table, "Every declared condition");
  metrics->add_option("--condition", mo.condition, "e.g. speed=70,w=0 or vent=2,w=0");
  metrics->add_option("--channel", mo.channel, "Channel (default: reference)");
  metrics->add_option("--format", mo.format, "csv | json");
  metrics->add_option("--out", mo.out, "Write the report here instead of stdout");

  auto* validate = app.add_subcommand("validate", "Check dataset coverage and integrity");

  CalibrateOptions co;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate a channel sensitivity from a pink-noise capture");
  calibrate->add_option("--car", co.car);
  calibrate->add_option("--setup", co.setup)->required();
  calibrate->add_option("--channel", co.channel)->required();
  calibrate->add_option("--recording", co.recording)->required();
  calibrate->add_option("--recording-channel", co.recording_channel);
  calibrate->add_option("--ref-dba", co.ref_dba, "Sound level meter reading")->required();

  FixtureCliOptions fo;
  auto* fixture = app.add_subcommand("fixture", "Write the synthetic miniature dataset");
  fixture->add_option("--seed", fo.seed);
  fixture->add_option("--noise-seconds", fo.noise_seconds);
  fixture->add_flag("--identity-irs", fo.identity_irs);

  SteeringOptions sto;
  auto* steering = app.add_subcommand("steering", "Export far-field steering vectors");
  steering->add_option("--freqs", sto.freqs, "Hz: list or start:stop:step");
  steering->add_option("--azimuths", sto.azimuths, "Degrees: list or start:stop:step");
  steering->add_option("--car", sto.car, "Take geometry from the dataset");
  steering->add_option("--setup", sto.setup);
  steering->add_option("--mics", sto.mics);
  steering->add_option("--radius", sto.radius);
  steering->add_option("--speed-of-sound", sto.speed_of_sound);
  steering->add_option("--out", sto.out);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    const bool needs_root = !steering->parsed() || !sto.car.empty();
    if (needs_root && g.root.empty()) throw InvalidArgument("no dataset root: pass --root or set CAVE_DATASET_ROOT");
    if (synth->parsed()) return CmdSynth(g, so, out, err);
    if (metrics->parsed()) return CmdMetrics(g, mo, out);
    if (validate->parsed()) return CmdValidate(g, out);
    if (calibrate->parsed()) return CmdCalibrate(g, co, out);
    if (fixture->parsed()) return CmdFixture(g, fo, out);
    if (steering->parsed()) return CmdSteering(g, sto, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DatasetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace carsynth
