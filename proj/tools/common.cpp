#include <cstdio>
#include <fstream>
#include <iostream>

#include "cli.hpp"

namespace tubalcast::cli {

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::NonFinite:
    case ErrorKind::NonRealResult: return kNumerical;
    case ErrorKind::MissingCheckpoint:
    case ErrorKind::FormatError:
    case ErrorKind::IntegrityError:
    case ErrorKind::GraphUnavailable: return kArtifact;
    default: return kUsage;
  }
}

std::filesystem::path norm_path_for(const std::filesystem::path& data) {
  std::filesystem::path p = data;
  p += ".norm";
  return p;
}

traffic::TrafficDataset load_dataset(const std::filesystem::path& path) {
  return as_input([&] {
    traffic::TrafficDataset d = traffic::ingest(path, traffic::guess_format(path));
    if (const auto np = norm_path_for(path); std::filesystem::exists(np)) d.norm = traffic::read_normalization(np);
    return d;
  });
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

CLI::App* subcommand(CLI::App& app, const std::string& name, const std::string& help) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->footer("Any flag may also be set in a key=value file passed as --config FILE.");
  return sub;
}

void write_csv(std::ostream& os, const Tensor3& t) {
  os.precision(17);
  const Dims3 d = t.dims();
  for (std::size_t k = 0; k < d.n3; ++k) {
    if (k > 0) os << "\n";
    for (std::size_t i = 0; i < d.n1; ++i)
      for (std::size_t j = 0; j < d.n2; ++j) os << t(i, j, k) << (j + 1 < d.n2 ? ',' : '\n');
  }
}

void write_tensor(const std::string& path, const Tensor3& t) {
  if (std::filesystem::path(path).extension() == ".csv") {
    std::ofstream os(path);
    if (!os) throw Failure(kUsage, "cannot write '" + path + "'");
    write_csv(os, t);
  } else {
    as_input([&] { write_t3f(path, t); });
  }
}

std::vector<CLI::ConfigItem> SubcommandConfig::from_config(std::istream& input) const {
  std::vector<CLI::ConfigItem> items = CLI::ConfigINI::from_config(input);
  const auto subs = app_->get_subcommands();
  if (subs.empty()) return items;
  for (auto& item : items)
    if (item.parents.empty() && item.name != "++" && item.name != "--") item.parents = {subs.front()->get_name()};
  return items;
}

void emit(const json& j) { std::cout << j.dump() << "\n" << std::flush; }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Failure(kUsage, "cannot write '" + path.string() + "'");
  os << j.dump(2) << "\n";
}

}  // namespace tubalcast::cli
