#include "stagnn/kernels.hpp"

#include <atomic>

#include "stagnn/errors.hpp"

namespace stagnn::kernels {

#if defined(STAGNN_HAVE_AVX2)
const KernelTable& avx2_table_impl();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(STAGNN_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* pick_auto() {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable* avx2_table() {
#if defined(STAGNN_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  if (supported) return &avx2_table_impl();
#endif
  return nullptr;
}

Backend parse_backend(const std::string& name) {
  if (name == "auto") return Backend::kAuto;
  if (name == "scalar") return Backend::kScalar;
  if (name == "avx2") return Backend::kAvx2;
  throw ParameterError("unknown kernel backend '" + name + "' (expected auto, scalar or avx2)");
}

void select_backend(Backend b) {
  switch (b) {
    case Backend::kAuto:
      g_active.store(pick_auto());
      break;
    case Backend::kScalar:
      g_active.store(&scalar_table());
      break;
    case Backend::kAvx2: {
      const KernelTable* t = avx2_table();
      if (t == nullptr) {
        throw ParameterError("avx2 kernel backend requested but not available on this machine");
      }
      g_active.store(t);
      break;
    }
  }
}

const KernelTable& active() {
  const KernelTable* t = g_active.load();
  if (t == nullptr) {
    t = pick_auto();
    g_active.store(t);
  }
  return *t;
}

const char* active_name() { return active().name; }

}  // namespace stagnn::kernels
