#include <cmath>

#include "json.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/fockspace.hpp"

namespace wignerscope {

std::string to_json(const DensityMatrix& rho) {
  const std::size_t d = rho.dim();
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (std::size_t j = 0; j < d; ++j) {
    nlohmann::json row_re = nlohmann::json::array();
    nlohmann::json row_im = nlohmann::json::array();
    for (std::size_t k = 0; k < d; ++k) {
      row_re.push_back(rho(j, k).real());
      row_im.push_back(rho(j, k).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  nlohmann::json out;
  out["dim"] = d;
  out["tail_mass"] = rho.tail_mass();
  out["re"] = std::move(re);
  out["im"] = std::move(im);
  return out.dump();
}

DensityMatrix density_matrix_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("density matrix JSON: ") + e.what());
  }
  try {
    const auto d = doc.at("dim").get<std::size_t>();
    const double tail = doc.value("tail_mass", 0.0);
    const auto& re = doc.at("re");
    const bool has_im = doc.contains("im");
    if (re.size() != d || (has_im && doc.at("im").size() != d))
      throw ValidationError("density matrix JSON: re/im must have dim rows");
    std::vector<cplx> entries(d * d);
    for (std::size_t j = 0; j < d; ++j) {
      if (re[j].size() != d || (has_im && doc["im"][j].size() != d))
        throw ValidationError("density matrix JSON: row " + std::to_string(j) +
                              " must have dim columns");
      for (std::size_t k = 0; k < d; ++k) {
        double a = re[j][k].get<double>();
        double b = has_im ? doc["im"][j][k].get<double>() : 0.0;
        entries[j * d + k] = {a, b};
      }
    }
    return DensityMatrix(d, std::move(entries), tail);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("density matrix JSON: ") + e.what());
  }
}

}  // namespace wignerscope
