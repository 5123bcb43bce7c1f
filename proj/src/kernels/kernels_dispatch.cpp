#include "varsparse/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace varsparse::kernels {

namespace detail {
#ifndef VARSPARSE_HAVE_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif
#ifndef VARSPARSE_HAVE_NEON
const KernelTable* neon_table() noexcept { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_has_avx2() noexcept {
#if defined(VARSPARSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() {
  if (const KernelTable* t = detail::neon_table()) return t;
  if (cpu_has_avx2()) return detail::avx2_table();
  return &scalar_table();
}

const KernelTable* find_table(std::string_view name) {
  for (const KernelTable* t : available_tables()) {
    if (name == t->name) return t;
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("VARSPARSE_KERNELS")) {
    const std::string_view requested(env);
    if (requested != "auto") {
      if (const KernelTable* t = find_table(requested)) return t;
    }
  }
  return best_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> tables{&scalar_table()};
  if (cpu_has_avx2()) tables.push_back(detail::avx2_table());
  if (const KernelTable* t = detail::neon_table()) tables.push_back(t);
  return tables;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = name == "auto" ? best_table() : find_table(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace varsparse::kernels
