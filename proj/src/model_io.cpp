#include "cfkit/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cfkit/errors.hpp"

namespace cfkit {

namespace {

void print_value(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void write_matrix_rows(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ' ';
      print_value(out, row[c]);
    }
    out << '\n';
  }
}

/// Line reader that remembers how many bytes it has consumed, so corruption
/// reports can point at the damage.
struct LineReader {
  std::istream& in;
  std::size_t offset = 0;

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::string expect(const char* what) {
    std::string line;
    if (!next(line)) throw CorruptModelError(std::string("file ends before ") + what, offset);
    return line;
  }
};

std::vector<double> parse_values(const std::string& line, std::size_t expected,
                                 std::size_t offset, const char* what) {
  std::vector<double> out;
  out.reserve(expected);
  const char* p = line.c_str();
  char* end = nullptr;
  while (*p) {
    double v = std::strtod(p, &end);
    if (end == p) throw CorruptModelError(std::string("bad number in ") + what, offset);
    out.push_back(v);
    p = end;
    while (*p == ' ') ++p;
  }
  if (out.size() != expected)
    throw CorruptModelError(std::string("wrong value count in ") + what, offset);
  return out;
}

DenseMatrix read_matrix_rows(LineReader& r, std::size_t rows, std::size_t cols,
                             const char* what) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::string line = r.expect(what);
    auto vals = parse_values(line, cols, r.offset, what);
    std::copy(vals.begin(), vals.end(), m.row(i).begin());
  }
  return m;
}

struct FacHeader {
  std::string kind;
  std::size_t k = 0, m = 0, n = 0;
  Normalization normalization = Normalization::none;
};

FacHeader read_fac_header(LineReader& r) {
  std::string header = r.expect("header");
  std::istringstream hs(header);
  std::string magic, version, kind, norm;
  std::size_t k = 0, m = 0, n = 0;
  if (!(hs >> magic >> version >> kind >> k >> m >> n >> norm) || magic != "facmodel")
    throw CorruptModelError("bad factor model header", r.offset);
  if (version != "v1") throw VersionError("unsupported facmodel version " + version);
  FacHeader h;
  h.kind = kind;
  h.k = k;
  h.m = m;
  h.n = n;
  h.normalization = normalization_from_string(norm);
  return h;
}

void write_fac_header(std::ostream& out, const std::string& kind, std::size_t k,
                      std::size_t m, std::size_t n, const NormalizationState& norm) {
  out << "facmodel v1 " << kind << ' ' << k << ' ' << m << ' ' << n << ' '
      << to_string(norm.kind) << '\n';
}

void write_means(std::ostream& out, const NormalizationState& norm, std::size_t m) {
  out << "means\n";
  for (std::size_t u = 0; u < m; ++u) {
    print_value(out, norm.kind == Normalization::user_mean_center ? norm.user_means[u]
                                                                  : 0.0);
    out << '\n';
  }
}

NormalizationState read_means(LineReader& r, Normalization kind, std::size_t m) {
  if (r.expect("means") != "means")
    throw CorruptModelError("expected means block", r.offset);
  NormalizationState norm;
  norm.kind = kind;
  norm.user_means.resize(m);
  for (std::size_t u = 0; u < m; ++u) {
    std::string line = r.expect("means");
    norm.user_means[u] = parse_values(line, 1, r.offset, "means")[0];
  }
  return norm;
}

void expect_tag(LineReader& r, const char* tag) {
  if (r.expect(tag) != tag)
    throw CorruptModelError(std::string("expected ") + tag + " block", r.offset);
}

}  // namespace

void write_factor_model(const FactorModel& model, std::ostream& out) {
  write_fac_header(out, to_string(model.kind), model.k, model.p.rows(), model.q.rows(),
                   model.normalization);
  write_means(out, model.normalization, model.p.rows());
  out << "P\n";
  write_matrix_rows(out, model.p);
  out << "Q\n";
  write_matrix_rows(out, model.q);
}

FactorModel read_factor_model(std::istream& in) {
  LineReader r{in};
  FacHeader h = read_fac_header(r);
  if (h.kind == "svd") throw DomainError("file holds an svd model, not a factor model");
  FactorModel model;
  model.kind = factor_kind_from_string(h.kind);
  model.k = h.k;
  model.normalization = read_means(r, h.normalization, h.m);
  expect_tag(r, "P");
  model.p = read_matrix_rows(r, h.m, h.k, "P block");
  expect_tag(r, "Q");
  model.q = read_matrix_rows(r, h.n, h.k, "Q block");
  return model;
}

void write_svd_model(const SvdModel& model, std::ostream& out) {
  const std::size_t m = model.user_factors.rows();
  const std::size_t n = model.item_factors.cols();
  write_fac_header(out, "svd", model.k, m, n, model.normalization);
  write_means(out, model.normalization, m);
  out << "P\n";
  write_matrix_rows(out, model.user_factors);
  out << "Q\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < model.k; ++j) {
      if (j) out << ' ';
      print_value(out, model.item_factors(j, i));
    }
    out << '\n';
  }
  out << "sigma\n";
  for (std::size_t j = 0; j < model.k; ++j) {
    if (j) out << ' ';
    print_value(out, model.singular_values[j]);
  }
  out << '\n';
}

SvdModel read_svd_model(std::istream& in) {
  LineReader r{in};
  FacHeader h = read_fac_header(r);
  if (h.kind != "svd") throw DomainError("file holds a " + h.kind + " model, not svd");
  SvdModel model;
  model.k = h.k;
  model.normalization = read_means(r, h.normalization, h.m);
  expect_tag(r, "P");
  model.user_factors = read_matrix_rows(r, h.m, h.k, "P block");
  expect_tag(r, "Q");
  DenseMatrix qt = read_matrix_rows(r, h.n, h.k, "Q block");
  model.item_factors = DenseMatrix(h.k, h.n);
  for (std::size_t i = 0; i < h.n; ++i)
    for (std::size_t j = 0; j < h.k; ++j) model.item_factors(j, i) = qt(i, j);
  expect_tag(r, "sigma");
  std::string line = r.expect("sigma");
  model.singular_values = parse_values(line, h.k, r.offset, "sigma");
  return model;
}

void save_model(const FactorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_factor_model(model, out);
  if (!out) throw IoError("failed writing " + path);
}

void save_model(const SvdModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_svd_model(model, out);
  if (!out) throw IoError("failed writing " + path);
}

void save_model(const SimilarityModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  model.save(out);
  if (!out) throw IoError("failed writing " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  std::istringstream fs(first);
  std::string magic, version, kind;
  fs >> magic >> version >> kind;
  if (magic == "simmodel") return SimilarityModel::load(in);
  if (magic == "facmodel") {
    if (version != "v1") throw VersionError("unsupported facmodel version " + version);
    if (kind == "svd") return read_svd_model(in);
    return read_factor_model(in);
  }
  throw CorruptModelError("unrecognized model file " + path, 0);
}

}  // namespace cfkit
