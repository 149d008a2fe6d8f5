#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pressurelab/expanding_map.hpp"

namespace pressurelab {

/// Number of admissible words of length n (row sums of A^(n-1)).
std::uint64_t count_admissible_words(const Adjacency& adjacency, int n);

/// Visits every admissible word of length n in colex order (position 0 varies
/// fastest). Plain odometer over all symbol strings, filtered by admissibility.
void for_each_admissible_word(const Adjacency& adjacency, int n,
                              const std::function<void(const std::vector<int>&)>& visit);

std::vector<Word> admissible_words(const Adjacency& adjacency, int n);

/// Primitive periodic words of period <= max_period, one per cycle: Lyndon
/// words whose cyclic closure (last -> first) is admissible.
std::vector<Word> primitive_cycles(const Adjacency& adjacency, int max_period);

/// The periodic point with itinerary w w w ..., found as the fixed point of
/// the composed inverse branches g_{w0} o ... o g_{w(p-1)}.
Point periodic_point(const ExpandingMap& map, const Word& w);

}  // namespace pressurelab
