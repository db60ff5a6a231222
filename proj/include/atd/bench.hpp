#pragma once

#include <cstdint>
#include <vector>

#include "atd/bitvec.hpp"
#include "atd/netlist.hpp"

namespace atd {

enum class BenchKind { MultShiftAdd, SpnCipher };

struct BenchSpec {
  BenchKind kind = BenchKind::MultShiftAdd;
  int width = 8;   // operand width (multiplier) or block width (SPN)
  int rounds = 4;  // SPN only
  BitVec key;      // SPN round-key seed; zero-extended/truncated to width
  bool identity_permutation = false;  // SPN test builds only
};

/// Sequential shift-and-add multiplier. Inputs are a[0..W) then b[0..W);
/// outputs are the 2W-bit registered product, valid at n_read = W + 1.
Netlist gen_multiplier(const BenchSpec& spec);

/// Iterative substitution-permutation network, one round per cycle.
/// Inputs are the plaintext block; outputs the registered state, valid at
/// n_read = rounds + 1.
Netlist gen_spn(const BenchSpec& spec);

Netlist generate(const BenchSpec& spec);

/// 4-bit substitution table used by gen_spn.
inline constexpr std::uint8_t kSbox[16] = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                                           0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

/// Destination bit of state bit i under the SPN permutation.
int spn_permute(int i, int width, bool identity);

/// Straight-line software model of gen_spn, for cross-checking.
BitVec spn_reference(const BenchSpec& spec, const BitVec& plaintext);

enum class PatternOrigin { Random, Structured };

struct PatternSet {
  std::vector<BitVec> inputs;
  std::vector<PatternOrigin> origin;
};

/// Structured vectors (all-0, all-1, walking-1, walking-0, 0101.., 1010..)
/// followed by n_random seeded random vectors, deduplicated.
PatternSet gen_patterns(int width, int n_random, std::uint64_t seed);

}  // namespace atd
