#pragma once

// Deterministic bit sources: MT19937, a SHA-1 counter-mode generator and raw
// files. Every source exposes the same MSB-first bit stream.

#include <array>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rngaudit {

using Bytes = std::vector<std::uint8_t>;

// One bit per element, each 0 or 1.
using BitBlock = std::vector<std::uint8_t>;

// MT19937, output-identical to std::mt19937. The first block of the state
// is seeded and twisted lazily, so a stream that needs only a few words does
// not pay for the full 624-word initialization.
class Mt19937 {
 public:
  static constexpr std::uint32_t kDefaultSeed = 5489u;

  explicit Mt19937(std::uint32_t seed = kDefaultSeed) { seed_with(seed); }

  void seed_with(std::uint32_t seed);
  std::uint32_t next_word() {
    if (index_ >= kN) {
      twist();
    } else if (first_round_) {
      twist_one();
    }
    std::uint32_t y = state_[index_++];
    y ^= y >> 11;
    y ^= (y << 7) & 0x9d2c5680u;
    y ^= (y << 15) & 0xefc60000u;
    y ^= y >> 18;
    return y;
  }

 private:
  static constexpr int kN = 624;
  static constexpr int kM = 397;

  void twist();
  void twist_one();

  std::array<std::uint32_t, kN> state_{};
  int index_ = 0;
  int seeded_ = 0;  // state_[0 .. seeded_) hold initialization values
  bool first_round_ = true;
};

using Sha1Digest = std::array<std::uint8_t, 20>;

// SHA-1 digest (OpenSSL).
Sha1Digest sha1(std::span<const std::uint8_t> message);

// SHA-1(key || counter as 8 bytes big-endian). Throws ConfigError on an
// empty key.
Sha1Digest sha1_block(std::span<const std::uint8_t> key, std::uint64_t counter);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Accepts an optional "0x" prefix; throws ConfigError on odd length or a
// non-hex character.
Bytes parse_hex(std::string_view hex);

void append_be64(Bytes& out, std::uint64_t value);

enum class GeneratorKind { kMt19937, kSha1Ctr, kFile };

// What to generate; a BitSource is instantiated from it per stream index.
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kMt19937;
  Bytes master_seed = {0x5e, 0xed};
  std::string path;  // kFile only

  // "mt19937", "sha1" or "file:<path>".
  static GeneratorSpec parse(std::string_view text, Bytes seed);
  std::string name() const;
  // File sources have a single sequential stream.
  bool is_streamable() const { return kind != GeneratorKind::kFile; }
};

// Low 32 bits of SHA-1(master_seed || stream_index as 8 bytes big-endian).
std::uint32_t derive_mt_seed(std::span<const std::uint8_t> master_seed,
                             std::uint64_t stream_index);

// Sequential reader over a generator's bit stream. Bits leave each 32-bit
// word (or each file byte) most significant bit first.
class BitSource {
 public:
  static BitSource make(const GeneratorSpec& spec, std::uint64_t stream_index);

  BitSource(BitSource&&) noexcept;
  BitSource& operator=(BitSource&&) noexcept;
  ~BitSource();

  BitBlock take_bits(std::size_t n);
  // Appends n bits to out.
  void take_bits_into(std::size_t n, BitBlock& out);
  std::uint32_t take_word();
  // Consumes exactly 32 bits and maps them to k / 2^32.
  double uniform01();
  // Next bit without consuming it.
  std::uint8_t peek_bit();
  // Consumes the maximal run of `bit` at the current position and returns
  // its length; the terminating different bit is left unread.
  std::uint64_t consume_run(std::uint8_t bit);

  std::uint64_t bits_consumed() const { return consumed_; }

 private:
  class Producer;
  class MtProducer;
  class Sha1Producer;
  class FileProducer;

  explicit BitSource(std::unique_ptr<Producer> producer);
  // Ensures at least `need` (<= 32) bits are buffered.
  void fill(int need);
  // Next chunk from the word buffer or the producer; returns its bit count.
  int pull(std::uint32_t& chunk);
  std::uint64_t available_bits() const;
  [[noreturn]] void exhausted(std::uint64_t requested) const;

  static constexpr int kWordBuffer = 64;

  std::unique_ptr<Producer> producer_;
  std::uint64_t acc_ = 0;  // MSB-aligned buffered bits
  int acc_bits_ = 0;
  std::uint64_t consumed_ = 0;
  std::array<std::uint32_t, kWordBuffer> words_{};
  int words_pos_ = 0;
  int words_len_ = 0;
};

}  // namespace rngaudit
