#ifndef WFH_ERROR_HPP
#define WFH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wfh {

// All library failures carry a short machine-readable code next to the
// human-readable message. The CLI forwards the code on its diagnostic
// stream so callers can dispatch without parsing prose.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string &message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string &code() const { return code_; }

  private:
    std::string code_;
};

namespace errc {
inline constexpr const char *kDomain = "domain_error";
inline constexpr const char *kShape = "shape_error";
inline constexpr const char *kOverflow = "overflow";
inline constexpr const char *kInvariant = "invariant_violation";
inline constexpr const char *kInsufficientData = "insufficient_data";
inline constexpr const char *kFitFailure = "fit_failure";
inline constexpr const char *kAlignment = "alignment_error";
inline constexpr const char *kParse = "parse_error";
inline constexpr const char *kUnreachableOutcome = "unreachable_outcome";
}  // namespace errc

}  // namespace wfh

#endif
