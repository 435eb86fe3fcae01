#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dromo/mdp.hpp"

namespace dromo {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
// Strict parse of a whole token; throws IoError on trailing garbage.
double parse_double(const std::string& token, const std::string& context);
int parse_int(const std::string& token, const std::string& context);

void write_mdp(std::ostream& out, const TabularMdp& mdp);
TabularMdp read_mdp(std::istream& in, const std::string& source = "<stream>");
void save_mdp(const std::string& path, const TabularMdp& mdp);
TabularMdp load_mdp(const std::string& path);

void write_features(std::ostream& out, const Eigen::MatrixXd& features);
Eigen::MatrixXd read_features(std::istream& in, const std::string& source = "<stream>");
Eigen::MatrixXd load_features(const std::string& path);

// Writes text to path via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace dromo
