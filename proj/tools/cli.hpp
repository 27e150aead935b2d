#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tubalcast/error.hpp"
#include "tubalcast/traffic/dataset.hpp"

namespace tubalcast::cli {

using json = nlohmann::json;

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;
inline constexpr int kArtifact = 4;

struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

int exit_code_for(ErrorKind kind) noexcept;

/// Reruns fn and turns any library error into Failure(code).
template <class F>
auto as_artifact(F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Failure(kArtifact, e.what());
  }
}
template <class F>
auto as_input(F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Failure(e.kind() == ErrorKind::NegativeTraffic || e.kind() == ErrorKind::ParseError ||
                          e.kind() == ErrorKind::ShapeError || e.kind() == ErrorKind::IoError ||
                          e.kind() == ErrorKind::FormatError || e.kind() == ErrorKind::DegenerateRange ||
                          e.kind() == ErrorKind::NonFinite
                      ? kUsage
                      : exit_code_for(e.kind()),
                  e.what());
  }
}

/// Normalized T3F dataset written by `ingest`, plus its ".norm" record when present.
traffic::TrafficDataset load_dataset(const std::filesystem::path& path);
std::filesystem::path norm_path_for(const std::filesystem::path& data);

std::string hex64(std::uint64_t v);
void emit(const json& j);  // one JSON line on stdout
void write_json(const std::filesystem::path& path, const json& j);

CLI::App* subcommand(CLI::App& app, const std::string& name, const std::string& help);
/// Frontal slices as n1-line CSV blocks separated by blank lines.
void write_csv(std::ostream& os, const Tensor3& t);
/// ".csv" writes CSV blocks, anything else T3F.
void write_tensor(const std::string& path, const Tensor3& t);

/// key=value config lines outside any [section] belong to the selected subcommand.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  const CLI::App* app_;
};

using Runner = std::function<int()>;

/// Each adds a subcommand whose callback stores its runner in `selected`.
void add_synth(CLI::App& app, Runner& selected);
void add_ingest(CLI::App& app, Runner& selected);
void add_pretrain(CLI::App& app, Runner& selected);
void add_train_optimizer(CLI::App& app, Runner& selected);
void add_forecast(CLI::App& app, Runner& selected);
void add_benchmark(CLI::App& app, Runner& selected);
void add_complete(CLI::App& app, Runner& selected);
void add_analyze_rank(CLI::App& app, Runner& selected);

}  // namespace tubalcast::cli
