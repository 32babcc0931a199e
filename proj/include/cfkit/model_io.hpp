#ifndef CFKIT_MODEL_IO_HPP_
#define CFKIT_MODEL_IO_HPP_

#include <iosfwd>
#include <string>
#include <variant>

#include "cfkit/factorization.hpp"
#include "cfkit/similarity.hpp"
#include "cfkit/svd.hpp"

namespace cfkit {

// Text model formats, 17-significant-digit decimals so doubles round-trip
// bit-exact.
//
//   facmodel v1 <kind> <k> <m> <n> <normalization>
//   means    (m lines; zeros when unnormalized)
//   P        (m lines of k values)
//   Q        (n lines of k values)
//   sigma    (one line of k values, kind=svd only)
//
// Similarity models use the simmodel format (see SimilarityModel::save).

void write_factor_model(const FactorModel& model, std::ostream& out);
FactorModel read_factor_model(std::istream& in);

void write_svd_model(const SvdModel& model, std::ostream& out);
SvdModel read_svd_model(std::istream& in);

using LoadedModel = std::variant<FactorModel, SvdModel, SimilarityModel>;

void save_model(const FactorModel& model, const std::string& path);
void save_model(const SvdModel& model, const std::string& path);
void save_model(const SimilarityModel& model, const std::string& path);

/// Reads any saved model, dispatching on the header. Unknown or mismatched
/// versions raise VersionError; short or mangled files raise
/// CorruptModelError with the byte offset that stopped the parse.
LoadedModel load_model(const std::string& path);

}  // namespace cfkit

#endif  // CFKIT_MODEL_IO_HPP_
