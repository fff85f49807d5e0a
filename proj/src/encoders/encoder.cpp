#include "trivote/encoders.hpp"

namespace trivote {

std::string_view to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::kSentence: return "sentence";
    case EncoderKind::kToken: return "token";
    case EncoderKind::kBoth: return "both";
  }
  return "both";
}

}  // namespace trivote
