#include "mpiwasm/linear_memory.hpp"

#include <sstream>

namespace mpiwasm {

HostSpan to_host(const LinearMemoryView& view, GuestAddress addr, std::uint64_t len) {
  if (!in_bounds(view, addr.offset, len)) {
    std::ostringstream msg;
    msg << "guest range [" << addr.offset << ", +" << len << ") exceeds linear memory of "
        << view.length << " bytes";
    throw MemoryFault(MemoryErrorKind::out_of_bounds, msg.str());
  }
  return HostSpan{view.base + addr.offset, static_cast<std::size_t>(len)};
}

GuestAddress to_guest(const LinearMemoryView& view, const std::byte* host) {
  // Compare as integers: relational operators on unrelated pointers are unspecified.
  const auto base = reinterpret_cast<std::uintptr_t>(view.base);
  const auto ptr = reinterpret_cast<std::uintptr_t>(host);
  if (ptr < base || ptr - base >= view.length) {
    throw MemoryFault(MemoryErrorKind::not_in_region,
                      "host address is not inside the instance's linear memory");
  }
  return GuestAddress{static_cast<std::uint32_t>(ptr - base)};
}

}  // namespace mpiwasm
