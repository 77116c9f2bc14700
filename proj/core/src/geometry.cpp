#include "hira/geometry.hpp"

namespace hira {

DramAddress Geometry::decode(std::uint64_t address) const {
  if (address >= static_cast<std::uint64_t>(capacity_bytes()))
    throw std::out_of_range("address beyond configured capacity");

  DramAddress a;
  std::uint64_t rest = address;

  a.column = static_cast<ColumnId>(rest % columns_per_row);
  rest /= columns_per_row;

  RowId bank_row = 0;
  switch (order) {
    case AddressOrder::RowInterleaved:
      bank_row = static_cast<RowId>(rest % rows_per_bank());
      rest /= rows_per_bank();
      a.bank = static_cast<BankId>(rest % banks_per_rank);
      rest /= banks_per_rank;
      break;
    case AddressOrder::BankInterleaved:
      a.bank = static_cast<BankId>(rest % banks_per_rank);
      rest /= banks_per_rank;
      bank_row = static_cast<RowId>(rest % rows_per_bank());
      rest /= rows_per_bank();
      break;
  }
  a.rank = static_cast<RankId>(rest % ranks_per_channel);
  rest /= ranks_per_channel;
  a.channel = static_cast<ChannelId>(rest);

  a.subarray = subarray_of(bank_row);
  a.row_in_subarray = row_within_subarray(bank_row);
  return a;
}

std::uint64_t Geometry::encode(const DramAddress& a) const {
  const std::uint64_t brow =
      static_cast<std::uint64_t>(bank_row(a.subarray, a.row_in_subarray));
  std::uint64_t v = static_cast<std::uint64_t>(a.channel);
  v = v * ranks_per_channel + a.rank;
  switch (order) {
    case AddressOrder::RowInterleaved:
      v = v * banks_per_rank + a.bank;
      v = v * rows_per_bank() + brow;
      break;
    case AddressOrder::BankInterleaved:
      v = v * rows_per_bank() + brow;
      v = v * banks_per_rank + a.bank;
      break;
  }
  v = v * columns_per_row + a.column;
  return v;
}

}  // namespace hira
