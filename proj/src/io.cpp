#include "ffasm/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& token, const std::string& file, int line,
                    int field) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError(file + ": line " + std::to_string(line) + ", field " +
                  std::to_string(field) + ": expected a number, got '" + token + "'");
  return value;
}

long long parse_int(const std::string& token, const std::string& file, int line,
                    int field) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const long long value = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw IoError(file + ": line " + std::to_string(line) + ", field " +
                  std::to_string(field) + ": expected an integer, got '" + token + "'");
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string family_name(Family f) {
  return f == Family::gaussian ? "gaussian" : "logistic";
}

Family family_from(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "logistic") return Family::logistic;
  throw IoError("unknown family '" + s + "'");
}

std::string path_name(FfasmPath p) {
  return p == FfasmPath::projection_linear ? "projection_linear" : "glm_augmented";
}

FfasmPath path_from(const std::string& s) {
  if (s == "projection_linear") return FfasmPath::projection_linear;
  if (s == "glm_augmented") return FfasmPath::glm_augmented;
  throw IoError("unknown path '" + s + "'");
}

std::string penalty_name(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::lasso: return "lasso";
    case PenaltyKind::mcp: return "mcp";
    case PenaltyKind::scad: return "scad";
  }
  return "mcp";
}

PenaltyKind penalty_from(const std::string& s) {
  if (s == "lasso") return PenaltyKind::lasso;
  if (s == "mcp") return PenaltyKind::mcp;
  if (s == "scad") return PenaltyKind::scad;
  throw IoError("unknown penalty '" + s + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

std::vector<ObservationRecord> read_longitudinal_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"subject", "covariate", "time", "value"})
    throw IoError(path + ": expected header subject,covariate,time,value");

  std::vector<ObservationRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw IoError(path + ": line " + std::to_string(line_no) + ": expected 4 fields, got " +
                    std::to_string(fields.size()));
    ObservationRecord rec;
    rec.subject = static_cast<int>(parse_int(fields[0], path, line_no, 1));
    const long long covariate = parse_int(fields[1], path, line_no, 2);
    if (covariate < 1)
      throw IoError(path + ": line " + std::to_string(line_no) +
                    ": covariate ids are 1-based");
    rec.covariate = static_cast<int>(covariate - 1);
    rec.time = parse_double(fields[2], path, line_no, 3);
    rec.value = parse_double(fields[3], path, line_no, 4);
    records.push_back(rec);
  }
  if (records.empty()) throw IoError(path + ": no observations");
  return records;
}

FunctionalSample read_dense_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "subject")
    throw IoError(path + ": expected header subject,g{index}_t{point},...");

  // Column layout: per covariate, the time points in file order.
  std::vector<std::vector<double>> times;   // per covariate
  std::vector<std::vector<int>> columns;    // matching CSV field indices
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& token = header[c];
    std::size_t tpos;
    if (token.size() < 4 || token[0] != 'g' ||
        (tpos = token.find("_t", 1)) == std::string::npos)
      throw IoError(path + ": header field " + std::to_string(c + 1) + ": expected g{index}_t{point}, got '" + token + "'");
    const long long g = parse_int(token.substr(1, tpos - 1), path, 1, static_cast<int>(c + 1));
    if (g < 1) throw IoError(path + ": covariate indices are 1-based");
    const double t = parse_double(token.substr(tpos + 2), path, 1, static_cast<int>(c + 1));
    if (static_cast<std::size_t>(g) > times.size()) {
      times.resize(static_cast<std::size_t>(g));
      columns.resize(static_cast<std::size_t>(g));
    }
    times[static_cast<std::size_t>(g - 1)].push_back(t);
    columns[static_cast<std::size_t>(g - 1)].push_back(static_cast<int>(c));
  }
  const int G = static_cast<int>(times.size());
  for (int g = 0; g < G; ++g) {
    if (times[static_cast<std::size_t>(g)].empty())
      throw IoError(path + ": covariate " + std::to_string(g + 1) + " has no columns");
    if (times[static_cast<std::size_t>(g)] != times[0])
      throw IoError(path + ": covariate " + std::to_string(g + 1) +
                    " uses a different grid than covariate 1");
  }
  const Grid grid = Grid::from_points(to_eigen(times[0]));
  const int L = grid.size();

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw IoError(path + ": line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    std::vector<double> row(fields.size() - 1);
    parse_int(fields[0], path, line_no, 1);  // subject id, order defines rows
    for (std::size_t c = 1; c < fields.size(); ++c)
      row[c - 1] = parse_double(fields[c], path, line_no, static_cast<int>(c + 1));
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n < 1) throw IoError(path + ": no data rows");

  FunctionalSample sample;
  sample.grid = grid;
  sample.centered = false;
  for (int g = 0; g < G; ++g) {
    Eigen::MatrixXd x(n, L);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < L; ++l)
        x(i, l) = rows[static_cast<std::size_t>(i)]
                      [static_cast<std::size_t>(columns[static_cast<std::size_t>(g)]
                                                       [static_cast<std::size_t>(l)]) - 1];
    sample.curves.push_back(std::move(x));
  }
  sample.validate();
  return sample;
}

void write_dense_csv(const std::string& path, const FunctionalSample& sample) {
  sample.validate();
  std::ofstream out = open_output(path);
  out << "subject";
  for (int g = 0; g < sample.G(); ++g)
    for (int l = 0; l < sample.grid.size(); ++l)
      out << ",g" << (g + 1) << "_t" << format_double(sample.grid.points[l]);
  out << "\n";
  for (int i = 0; i < sample.n(); ++i) {
    out << (i + 1);
    for (int g = 0; g < sample.G(); ++g)
      for (int l = 0; l < sample.grid.size(); ++l)
        out << ',' << format_double(sample.curves[static_cast<std::size_t>(g)](i, l));
    out << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

Eigen::VectorXd read_response_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 1)
      throw IoError(path + ": line " + std::to_string(line_no) + ": expected 1 field, got " +
                    std::to_string(fields.size()));
    if (line_no == 1) {
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str() || *end != '\0') continue;  // header line
    }
    values.push_back(parse_double(fields[0], path, line_no, 1));
  }
  if (values.empty()) throw IoError(path + ": no response values");
  return to_eigen(values);
}

void write_response_csv(const std::string& path, const Eigen::VectorXd& y) {
  std::ofstream out = open_output(path);
  out << "y\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) out << format_double(y[i]) << "\n";
  if (!out) throw IoError("failed while writing " + path);
}

nlohmann::json fit_to_json(const FfasmFit& fit) {
  nlohmann::json j;
  j["schema"] = "ffasm/v1";
  j["kind"] = "fit";
  j["family"] = family_name(fit.family);
  j["path"] = path_name(fit.path);
  j["K"] = fit.K;
  j["lambda"] = fit.lambda;
  j["beta0"] = fit.beta0;
  j["mu_y"] = fit.mu_y;
  j["base"] = fit.base;
  j["m_per_covariate"] = fit.m_per_covariate;

  nlohmann::json blocks = nlohmann::json::array();
  Eigen::Index offset = 0;
  for (int m : fit.m_per_covariate) {
    blocks.push_back(to_std(fit.H.segment(offset, m)));
    offset += m;
  }
  j["eta_blocks"] = std::move(blocks);
  j["gamma"] = to_std(fit.gamma);

  nlohmann::json selected = nlohmann::json::array();
  for (int g : fit.selected) selected.push_back(g + 1);
  j["selected"] = std::move(selected);

  j["grid"] = to_std(fit.grid.points);
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : fit.beta_curves) curves.push_back(to_std(c));
  j["beta_curves"] = std::move(curves);
  nlohmann::json means = nlohmann::json::array();
  for (const auto& c : fit.mean_curves) means.push_back(to_std(c));
  j["mean_curves"] = std::move(means);

  j["factor_eigenvalues"] = to_std(fit.factors.eigenvalues);
  j["warnings"] = fit.warnings;
  if (fit.cv.lambdas.size() > 0) {
    j["cv"] = {{"lambdas", to_std(fit.cv.lambdas)},
               {"errors", to_std(fit.cv.errors)},
               {"index", fit.cv.index}};
  }
  return j;
}

FfasmFit fit_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "ffasm/v1" || j.value("kind", "") != "fit")
    throw IoError("fit_from_json: not an ffasm/v1 fit document");
  FfasmFit fit;
  fit.family = family_from(j.at("family").get<std::string>());
  fit.path = path_from(j.at("path").get<std::string>());
  fit.K = j.at("K").get<int>();
  fit.lambda = j.at("lambda").get<double>();
  fit.beta0 = j.at("beta0").get<double>();
  fit.mu_y = j.at("mu_y").get<double>();
  fit.base = j.at("base").get<double>();
  fit.m_per_covariate = j.at("m_per_covariate").get<std::vector<int>>();

  std::vector<double> H;
  for (const auto& block : j.at("eta_blocks")) {
    const auto vals = block.get<std::vector<double>>();
    H.insert(H.end(), vals.begin(), vals.end());
  }
  fit.H = to_eigen(H);
  fit.gamma = to_eigen(j.at("gamma").get<std::vector<double>>());
  for (const auto& g : j.at("selected")) fit.selected.push_back(g.get<int>() - 1);

  fit.grid = Grid::from_points(to_eigen(j.at("grid").get<std::vector<double>>()));
  for (const auto& c : j.at("beta_curves"))
    fit.beta_curves.push_back(to_eigen(c.get<std::vector<double>>()));
  for (const auto& c : j.at("mean_curves"))
    fit.mean_curves.push_back(to_eigen(c.get<std::vector<double>>()));
  fit.factors.eigenvalues =
      to_eigen(j.value("factor_eigenvalues", std::vector<double>()));
  fit.warnings = j.value("warnings", std::vector<std::string>());
  if (j.contains("cv")) {
    fit.cv.lambdas = to_eigen(j["cv"].at("lambdas").get<std::vector<double>>());
    fit.cv.errors = to_eigen(j["cv"].at("errors").get<std::vector<double>>());
    fit.cv.index = j["cv"].at("index").get<int>();
    fit.cv.lambda = fit.cv.lambdas[fit.cv.index];
  }
  return fit;
}

nlohmann::json config_to_json(const FfasmConfig& cfg) {
  nlohmann::json j;
  j["schema"] = "ffasm/v1";
  j["kind"] = "config";
  if (cfg.truncation.fixed_m)
    j["truncation"] = {{"fixed_m", *cfg.truncation.fixed_m}};
  else
    j["truncation"] = {{"fve", cfg.truncation.fve}};
  j["factor_selection"] = {{"k_max", cfg.factor_selection.k_max},
                           {"c_n", cfg.factor_selection.c_n}};
  j["fixed_K"] = cfg.fixed_K;
  j["penalty"] = {{"kind", penalty_name(cfg.penalty.kind)}, {"gamma", cfg.penalty.gamma}};
  if (cfg.fixed_lambda) j["fixed_lambda"] = *cfg.fixed_lambda;
  j["family"] = family_name(cfg.family);
  j["path"] = path_name(cfg.path);
  j["cv"] = {{"scheme", cfg.cv.kind == CvScheme::Kind::kfold ? "kfold" : "holdout_third"},
             {"folds", cfg.cv.folds}};
  j["n_lambda"] = cfg.n_lambda;
  j["lambda_ratio"] = cfg.lambda_ratio;
  j["penalize_intercept"] = cfg.penalize_intercept;
  j["selection_threshold"] = cfg.selection_threshold;
  j["seed"] = cfg.seed;
  j["fit"] = {{"tol", cfg.fit.tol},
              {"max_iter", cfg.fit.max_iter},
              {"standardize", cfg.fit.standardize}};
  return j;
}

FfasmConfig config_from_json(const nlohmann::json& j) {
  FfasmConfig cfg;
  if (j.contains("truncation")) {
    const auto& t = j["truncation"];
    if (t.contains("fixed_m"))
      cfg.truncation = Truncation::fixed(t["fixed_m"].get<int>());
    else if (t.contains("fve"))
      cfg.truncation = Truncation::by_fve(t["fve"].get<double>());
    else
      throw IoError("config: truncation needs fixed_m or fve");
  }
  if (j.contains("factor_selection")) {
    cfg.factor_selection.k_max = j["factor_selection"].value("k_max", 0);
    cfg.factor_selection.c_n = j["factor_selection"].value("c_n", 0.0);
  }
  cfg.fixed_K = j.value("fixed_K", 0);
  if (j.contains("penalty")) {
    const auto& p = j["penalty"];
    cfg.penalty.kind = penalty_from(p.value("kind", "mcp"));
    cfg.penalty.gamma =
        p.value("gamma", cfg.penalty.kind == PenaltyKind::scad ? 3.7 : 3.0);
  }
  if (j.contains("fixed_lambda")) cfg.fixed_lambda = j["fixed_lambda"].get<double>();
  if (j.contains("family")) cfg.family = family_from(j["family"].get<std::string>());
  if (j.contains("path")) cfg.path = path_from(j["path"].get<std::string>());
  if (j.contains("cv")) {
    const std::string scheme = j["cv"].value("scheme", "holdout_third");
    if (scheme == "kfold")
      cfg.cv = CvScheme::kfold(j["cv"].value("folds", 5));
    else if (scheme == "holdout_third")
      cfg.cv = CvScheme::holdout_third();
    else
      throw IoError("config: unknown cv scheme '" + scheme + "'");
  }
  cfg.n_lambda = j.value("n_lambda", cfg.n_lambda);
  cfg.lambda_ratio = j.value("lambda_ratio", cfg.lambda_ratio);
  cfg.penalize_intercept = j.value("penalize_intercept", cfg.penalize_intercept);
  cfg.selection_threshold = j.value("selection_threshold", cfg.selection_threshold);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("fit")) {
    cfg.fit.tol = j["fit"].value("tol", cfg.fit.tol);
    cfg.fit.max_iter = j["fit"].value("max_iter", cfg.fit.max_iter);
    cfg.fit.standardize = j["fit"].value("standardize", cfg.fit.standardize);
  }
  cfg.validate();
  return cfg;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed while writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace ffasm
