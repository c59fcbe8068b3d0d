#include "miace/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace miace {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

// Shortest-exact is overkill; 17 significant digits always round-trips.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad numeric field '" + token + "' in " + where);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw IoError(what + " is not an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json load_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
  }
  return doc;
}

}  // namespace

void write_bag_csv(const std::filesystem::path& path, const BagSet& bags) {
  auto out = open_out(path);
  out << "bag_id,label";
  for (Eigen::Index i = 0; i < bags.dimension(); ++i) out << ",f" << i;
  out << "\n";
  for (const auto& bag : bags.bags()) {
    for (const auto& x : bag.instances) {
      out << bag.id << ',' << (bag.positive ? 1 : 0);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        out << ',' << format_double(x[i]);
      }
      out << "\n";
    }
  }
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

BagSet read_bag_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty bag file '" + path.string() + "'");
  }
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "bag_id" || header[1] != "label") {
    throw IoError("bad bag CSV header in '" + path.string() + "'");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t i = 0; i < d; ++i) {
    if (header[i + 2] != "f" + std::to_string(i)) {
      throw IoError("bad feature column '" + header[i + 2] + "' in '" +
                    path.string() + "'");
    }
  }

  // Rows group by bag id in first-appearance order.
  std::vector<Bag> bags;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != d + 2) {
      throw IoError("expected " + std::to_string(d + 2) + " fields in " +
                    where + ", got " + std::to_string(fields.size()));
    }
    const std::string& id = fields[0];
    const bool positive = fields[1] == "1";
    if (fields[1] != "0" && fields[1] != "1") {
      throw IoError("label must be 0 or 1 in " + where);
    }
    Instance x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      x[static_cast<Eigen::Index>(i)] = parse_double(fields[i + 2], where);
    }
    auto [it, inserted] = index.try_emplace(id, bags.size());
    if (inserted) {
      Bag bag;
      bag.id = id;
      bag.positive = positive;
      bags.push_back(std::move(bag));
    } else if (bags[it->second].positive != positive) {
      throw IoError("bag '" + id + "' has conflicting labels in " + where);
    }
    bags[it->second].instances.push_back(std::move(x));
  }
  if (bags.empty()) throw IoError("no instances in '" + path.string() + "'");
  return BagSet(std::move(bags));
}

void write_truth_csv(const std::filesystem::path& path,
                     const SyntheticDataset& data) {
  auto out = open_out(path);
  out << "instance_id,bag_id,alpha_target,instance_label\n";
  for (std::size_t i = 0; i < data.truth.size(); ++i) {
    const auto& t = data.truth[i];
    out << i << ',' << t.bag_id << ',' << format_double(t.alpha_target) << ','
        << (t.is_target ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "instance_id,bag_id,alpha_target,instance_label") {
    throw IoError("bad truth CSV header in '" + path.string() + "'");
  }
  std::vector<TruthRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 4) throw IoError("expected 4 fields in " + where);
    TruthRow row;
    row.bag_id = fields[1];
    row.alpha_target = parse_double(fields[2], where);
    row.instance_label = fields[3] == "1" ? 1 : 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_signature_json(const std::filesystem::path& path,
                          const SignatureFile& file) {
  const auto& sig = file.signature;
  json doc;
  doc["mode"] = to_string(sig.mode);
  doc["d"] = sig.dimension();
  doc["signature"] = vector_to_json(sig.signature);
  doc["mu_b"] = vector_to_json(sig.stats.mean);
  json sigma = json::array();
  for (Eigen::Index r = 0; r < sig.stats.covariance.rows(); ++r) {
    for (Eigen::Index c = 0; c < sig.stats.covariance.cols(); ++c) {
      sigma.push_back(sig.stats.covariance(r, c));
    }
  }
  doc["sigma_b"] = std::move(sigma);
  doc["iterations"] = file.iterations;
  doc["objective"] = file.objective;
  doc["converged"] = file.converged;
  doc["epsilon"] = sig.stats.epsilon;
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

SignatureFile read_signature_json(const std::filesystem::path& path) {
  const json doc = load_json(path);
  try {
    SignatureFile file;
    const auto d = doc.at("d").get<Eigen::Index>();
    const Eigen::VectorXd s = vector_from_json(doc.at("signature"), "signature");
    const Eigen::VectorXd mu = vector_from_json(doc.at("mu_b"), "mu_b");
    const auto sigma_flat = doc.at("sigma_b");
    if (s.size() != d || mu.size() != d ||
        static_cast<Eigen::Index>(sigma_flat.size()) != d * d) {
      throw IoError("inconsistent dimensions in '" + path.string() + "'");
    }
    Eigen::MatrixXd sigma(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        sigma(r, c) = sigma_flat[static_cast<std::size_t>(r * d + c)]
                          .get<double>();
      }
    }
    // Rebuild the eigendecomposition from the stored covariance; the
    // solver is deterministic so scores reproduce exactly.
    BackgroundStats stats;
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
          0.5 * (sigma + sigma.transpose()));
      if (solver.info() != Eigen::Success) {
        throw IoError("stored covariance failed to decompose");
      }
      stats.mean = mu;
      stats.covariance = sigma;
      stats.eigenvalues = solver.eigenvalues().reverse();
      stats.eigenvectors = solver.eigenvectors().rowwise().reverse();
      stats.epsilon = doc.value("epsilon", 0.0);
      if (stats.eigenvalues[d - 1] <= 0.0) {
        throw IoError("stored covariance is not positive definite");
      }
    }
    file.signature.mode = mode_from_string(doc.at("mode").get<std::string>());
    file.signature.signature = s;
    file.signature.stats = std::move(stats);
    file.signature.whitened =
        whiten(s + file.signature.stats.mean, file.signature.stats, true)
            .normalized.value();
    file.iterations = doc.at("iterations").get<int>();
    file.objective = doc.at("objective").get<double>();
    file.converged = doc.value("converged", true);
    return file;
  } catch (const json::exception& e) {
    throw IoError("bad signature JSON '" + path.string() + "': " + e.what());
  }
}

void write_plain_signature_json(const std::filesystem::path& path,
                                const Eigen::VectorXd& signature) {
  json doc;
  doc["d"] = signature.size();
  doc["signature"] = vector_to_json(signature);
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

void write_concept_json(const std::filesystem::path& path,
                        const DDConcept& dd) {
  json doc;
  doc["point"] = vector_to_json(dd.point);
  doc["scales"] = vector_to_json(dd.scales);
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

DDConcept read_concept_json(const std::filesystem::path& path) {
  const json doc = load_json(path);
  try {
    DDConcept dd;
    dd.point = vector_from_json(doc.at("point"), "point");
    dd.scales = vector_from_json(doc.at("scales"), "scales");
    if (dd.point.size() != dd.scales.size()) {
      throw IoError("point/scales lengths differ in '" + path.string() + "'");
    }
    return dd;
  } catch (const json::exception& e) {
    throw IoError("bad concept JSON '" + path.string() + "': " + e.what());
  }
}

void write_scores_csv(const std::filesystem::path& path,
                      const std::vector<ScoreRow>& rows) {
  auto out = open_out(path);
  const bool with_truth =
      !rows.empty() && rows.front().truth_label.has_value();
  out << (with_truth ? "instance_id,score,truth_label\n"
                     : "instance_id,score\n");
  for (const auto& row : rows) {
    out << row.instance_id << ',' << format_double(row.score);
    if (with_truth) out << ',' << row.truth_label.value_or(0);
    out << "\n";
  }
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty scores file '" + path.string() + "'");
  }
  bool with_truth = false;
  if (line == "instance_id,score,truth_label") {
    with_truth = true;
  } else if (line != "instance_id,score") {
    throw IoError("bad scores CSV header in '" + path.string() + "'");
  }
  std::vector<ScoreRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != (with_truth ? 3u : 2u)) {
      throw IoError("wrong field count in " + where);
    }
    ScoreRow row;
    row.instance_id = fields[0];
    row.score = parse_double(fields[1], where);
    if (with_truth) {
      if (fields[2] != "0" && fields[2] != "1") {
        throw IoError("truth_label must be 0 or 1 in " + where);
      }
      row.truth_label = fields[2] == "1" ? 1 : 0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<IterationRecord>& trace) {
  auto out = open_out(path);
  out << "iteration,objective,selection_hash\n";
  char hash_hex[17];
  for (const auto& rec : trace) {
    std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64,
                  rec.selection_hash);
    out << rec.iteration << ',' << format_double(rec.objective) << ','
        << hash_hex << "\n";
  }
}

void write_results_csv(const std::filesystem::path& path,
                       const ExperimentResults& results) {
  auto out = open_out(path);
  out << "cell,algorithm,mean,std,mean_runtime_s,runs_completed,error\n";
  for (const auto& row : results.rows) {
    std::string error = row.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << row.cell << ',' << row.algorithm << ',' << format_double(row.mean)
        << ',' << format_double(row.stddev) << ','
        << format_double(row.mean_runtime_s) << ',' << row.runs_completed
        << ',' << error << "\n";
  }
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  auto out = open_out(path);
  out << "far,pd\n";
  for (const auto& p : curve.points) {
    out << format_double(p.far) << ',' << format_double(p.pd) << "\n";
  }
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto begin = s.find_first_not_of(" \t\r");
    const auto end = s.find_last_not_of(" \t\r");
    return begin == std::string::npos ? std::string()
                                      : s.substr(begin, end - begin + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not 'key = value': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("empty key on config line " + std::to_string(line_no));
    }
    config[key] = value;
  }
  return config;
}

std::map<std::string, std::string> parse_config_file(
    const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot digest '" + path.string() + "'");
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest) {
  json doc;
  doc["command"] = manifest.command;
  doc["version"] = "0.1.0";
  doc["config"] = manifest.config;
  json seeds;
  for (const auto& [name, value] : manifest.seeds) seeds[name] = value;
  doc["seeds"] = std::move(seeds);
  json inputs;
  for (const auto& p : manifest.inputs) inputs[p.string()] = file_digest(p);
  doc["inputs"] = std::move(inputs);
  json outputs;
  for (const auto& p : manifest.outputs) outputs[p.string()] = file_digest(p);
  doc["outputs"] = std::move(outputs);
  doc["wall_clock_s"] = manifest.wall_clock_s;
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

}  // namespace miace
