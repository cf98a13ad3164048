#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace litelong {

enum class MockRole { debater, judge };

std::string_view to_string(MockRole role);

/// Deterministic stand-in for a Debate or Judge model.
///
/// A debater answers a topic request with exactly facet_count topics of the
/// form "<subcategory label> U+2014 facet i" and a critique request with one
/// critique per topic, alternating support/object by topic index. Facet
/// numbers for debater k start at (k - 1) * facet_count + 1, so the two
/// debaters of a round never propose the same string.
///
/// A judge rejects every reject_every-th topic (1-indexed, prompt order)
/// with reason "mock-reject"; 0 means it rejects nothing. Asked for
/// acceptances instead, it accepts exactly the complement.
struct MockProfile {
  MockRole role = MockRole::debater;
  int reject_every = 0;
  int facet_count = 4;
  std::uint64_t seed = 0;
};

/// Pure function of (profile, prompt). Throws ValidationError when the
/// prompt carries no round context or asks for a task the role cannot do.
std::string mock_complete(const MockProfile& profile, std::string_view prompt);

}  // namespace litelong
