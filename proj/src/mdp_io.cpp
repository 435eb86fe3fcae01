#include "dromo/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace dromo {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double x = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last)
    throw IoError(context + ": expected a number, got '" + token + "'");
  return x;
}

int parse_int(const std::string& token, const std::string& context) {
  int x = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw IoError(context + ": expected an integer, got '" + token + "'");
  return x;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

int checked_index(const std::string& tok, int bound, const std::string& ctx) {
  int i = parse_int(tok, ctx);
  if (i < 0 || i >= bound) throw IoError(ctx + ": index " + tok + " out of range");
  return i;
}

}  // namespace

void write_mdp(std::ostream& out, const TabularMdp& mdp) {
  out << "mdp " << mdp.n_states() << ' ' << mdp.n_actions() << ' ' << format_double(mdp.gamma())
      << '\n';
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      out << "r " << s << ' ' << a << ' ' << format_double(mdp.reward()(s, a)) << '\n';
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      for (int s2 = 0; s2 < mdp.n_states(); ++s2) {
        double p = mdp.transition()(mdp.pair(s, a), s2);
        if (p != 0.0)
          out << "t " << s << ' ' << a << ' ' << s2 << ' ' << format_double(p) << '\n';
      }
  for (int s = 0; s < mdp.n_states(); ++s)
    if (mdp.initial_dist()[s] != 0.0)
      out << "mu " << s << ' ' << format_double(mdp.initial_dist()[s]) << '\n';
}

TabularMdp read_mdp(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  int ns = 0, na = 0;
  double gamma = 0.0;
  bool have_header = false;
  Eigen::MatrixXd t, r;
  Eigen::VectorXd mu;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = split_ws(strip_comment(line));
    if (tok.empty()) continue;
    std::string ctx = source + ":" + std::to_string(line_no);
    if (!have_header) {
      if (tok.size() != 4 || tok[0] != "mdp") throw IoError(ctx + ": expected 'mdp nS nA gamma'");
      ns = parse_int(tok[1], ctx);
      na = parse_int(tok[2], ctx);
      gamma = parse_double(tok[3], ctx);
      if (ns <= 0 || na <= 0) throw IoError(ctx + ": nonpositive dimensions");
      if (static_cast<long>(ns) * na > kMaxStateActions) throw IoError(ctx + ": MDP too large");
      t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns) * na, ns);
      r = Eigen::MatrixXd::Zero(ns, na);
      mu = Eigen::VectorXd::Zero(ns);
      have_header = true;
      continue;
    }
    if (tok[0] == "r" && tok.size() == 4) {
      int s = checked_index(tok[1], ns, ctx), a = checked_index(tok[2], na, ctx);
      r(s, a) = parse_double(tok[3], ctx);
    } else if (tok[0] == "t" && tok.size() == 5) {
      int s = checked_index(tok[1], ns, ctx), a = checked_index(tok[2], na, ctx);
      int s2 = checked_index(tok[3], ns, ctx);
      t(static_cast<Eigen::Index>(s) * na + a, s2) = parse_double(tok[4], ctx);
    } else if (tok[0] == "mu" && tok.size() == 3) {
      mu[checked_index(tok[1], ns, ctx)] = parse_double(tok[2], ctx);
    } else {
      throw IoError(ctx + ": unrecognized line '" + line + "'");
    }
  }
  if (!have_header) throw IoError(source + ": missing 'mdp' header");
  try {
    return TabularMdp(ns, na, std::move(t), std::move(r), std::move(mu), gamma);
  } catch (const std::invalid_argument& e) {
    throw IoError(source + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << contents;
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

void save_mdp(const std::string& path, const TabularMdp& mdp) {
  std::ostringstream ss;
  write_mdp(ss, mdp);
  write_file_atomic(path, ss.str());
}

TabularMdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open MDP file '" + path + "'");
  return read_mdp(in, path);
}

void write_features(std::ostream& out, const Eigen::MatrixXd& features) {
  out << "features " << features.rows() << ' ' << features.cols() << '\n';
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j)
      out << (j ? " " : "") << format_double(features(i, j));
    out << '\n';
  }
}

Eigen::MatrixXd read_features(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  Eigen::MatrixXd f;
  Eigen::Index rows = -1, filled = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = split_ws(strip_comment(line));
    if (tok.empty()) continue;
    std::string ctx = source + ":" + std::to_string(line_no);
    if (rows < 0) {
      if (tok.size() != 3 || tok[0] != "features")
        throw IoError(ctx + ": expected 'features rows dim'");
      rows = parse_int(tok[1], ctx);
      int dim = parse_int(tok[2], ctx);
      if (rows <= 0 || dim <= 0) throw IoError(ctx + ": nonpositive feature shape");
      f.resize(rows, dim);
      continue;
    }
    if (filled >= rows) throw IoError(ctx + ": more rows than declared");
    if (static_cast<Eigen::Index>(tok.size()) != f.cols())
      throw IoError(ctx + ": expected " + std::to_string(f.cols()) + " values");
    for (Eigen::Index j = 0; j < f.cols(); ++j) f(filled, j) = parse_double(tok[j], ctx);
    ++filled;
  }
  if (rows < 0) throw IoError(source + ": missing 'features' header");
  if (filled != rows) throw IoError(source + ": fewer rows than declared");
  return f;
}

Eigen::MatrixXd load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file '" + path + "'");
  return read_features(in, path);
}

}  // namespace dromo
