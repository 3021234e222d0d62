#pragma once

#include <string>
#include <string_view>

namespace qcopt {

/// Porter (1980) suffix stripper, published rule set without later
/// extensions. Input is expected to be lowercase ASCII; other bytes are
/// treated as consonants.
std::string porter_stem(std::string_view word);

}  // namespace qcopt
