#pragma once

#include <cstdint>
#include <stdexcept>

#include "hira/types.hpp"

namespace hira {

struct DramAddress {
  ChannelId channel = 0;
  RankId rank = 0;
  BankId bank = 0;
  SubarrayId subarray = 0;
  RowId row_in_subarray = 0;
  ColumnId column = 0;

  bool operator==(const DramAddress&) const = default;
};

enum class AddressOrder {
  // LSB-to-MSB field order: column, row, bank, rank, channel.
  // Consecutive rows land in the same bank.
  RowInterleaved,
  // LSB-to-MSB field order: column, bank, row, rank, channel.
  // Consecutive rows round-robin across banks.
  BankInterleaved,
};

struct Geometry {
  std::int64_t channels = 1;
  std::int64_t ranks_per_channel = 1;
  std::int64_t banks_per_rank = 16;
  std::int64_t subarrays_per_bank = 128;
  std::int64_t rows_per_subarray = 512;
  std::int64_t columns_per_row = 1024;  // one byte per column
  AddressOrder order = AddressOrder::RowInterleaved;

  std::int64_t rows_per_bank() const { return subarrays_per_bank * rows_per_subarray; }
  std::int64_t banks_per_channel() const { return ranks_per_channel * banks_per_rank; }

  std::int64_t capacity_bytes() const {
    return channels * ranks_per_channel * banks_per_rank * rows_per_bank() *
           columns_per_row;
  }

  void validate() const {
    if (channels <= 0 || ranks_per_channel <= 0 || banks_per_rank <= 0 ||
        subarrays_per_bank <= 0 || rows_per_subarray <= 0 || columns_per_row <= 0)
      throw std::invalid_argument("all geometry counts must be positive");
  }

  SubarrayId subarray_of(RowId bank_row) const {
    return static_cast<SubarrayId>(bank_row / rows_per_subarray);
  }
  RowId row_within_subarray(RowId bank_row) const {
    return bank_row % rows_per_subarray;
  }
  RowId bank_row(SubarrayId sa, RowId row_in_sa) const {
    return static_cast<RowId>(sa) * rows_per_subarray + row_in_sa;
  }

  // Mixed-radix field decode of a byte address. Works for any field sizes,
  // not just powers of two.
  DramAddress decode(std::uint64_t address) const;
  std::uint64_t encode(const DramAddress& a) const;
};

}  // namespace hira
