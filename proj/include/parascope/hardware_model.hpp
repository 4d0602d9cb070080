/**
 * Copyright 2026 The Parascope Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PARASCOPE_HARDWARE_MODEL_HPP
#define PARASCOPE_HARDWARE_MODEL_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace parascope {

inline constexpr double kGiB = 1073741824.0;

enum class LinkClass : int {
  GpuMemory = 0,
  NvLink,
  PciExpress,
  InfiniBand,
  CpuGpu,
  Ethernet,
  DiskNvme,
  DiskHdd,
};

inline constexpr std::size_t kLinkCount = 8;

inline constexpr std::array<LinkClass, kLinkCount> kAllLinks = {
    LinkClass::GpuMemory, LinkClass::NvLink,   LinkClass::PciExpress,
    LinkClass::InfiniBand, LinkClass::CpuGpu,  LinkClass::Ethernet,
    LinkClass::DiskNvme,  LinkClass::DiskHdd};

inline std::string_view link_name(LinkClass l) {
  switch (l) {
    case LinkClass::GpuMemory: return "gpu-memory";
    case LinkClass::NvLink: return "nvlink";
    case LinkClass::PciExpress: return "pci-express";
    case LinkClass::InfiniBand: return "infiniband";
    case LinkClass::CpuGpu: return "cpu-gpu";
    case LinkClass::Ethernet: return "ethernet";
    case LinkClass::DiskNvme: return "disk-nvme";
    case LinkClass::DiskHdd: return "disk-hdd";
  }
  throw std::invalid_argument("unknown link class");
}

inline LinkClass link_from_name(std::string_view n) {
  for (LinkClass l : kAllLinks)
    if (link_name(l) == n) return l;
  throw std::invalid_argument("unknown link class: " + std::string(n));
}

inline constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

struct HardwareProfile {
  std::string name;
  double c_gpu = 0.0;                        // flop/s
  double m_gpu = 0.0;                        // bytes
  std::array<double, kLinkCount> bandwidth{};  // input + output, bytes/s
  std::int64_t max_node_size = 16;
  std::int64_t gpus_per_node = 16;
  // Link used by data-parallel and pipeline traffic between nodes.
  LinkClass inter_node = LinkClass::InfiniBand;
  // Link used by state and checkpoint offload.
  LinkClass host_link = LinkClass::CpuGpu;

  double bw(LinkClass l) const { return bandwidth[static_cast<std::size_t>(l)]; }
  bool node_unbounded() const { return max_node_size == kUnbounded; }

  void validate() const {
    if (!(c_gpu > 0.0)) throw std::invalid_argument("c_gpu must be positive");
    if (!(m_gpu > 0.0)) throw std::invalid_argument("m_gpu must be positive");
    for (double b : bandwidth)
      if (!(b > 0.0)) throw std::invalid_argument("link bandwidths must be positive");
    if (max_node_size < 1) throw std::invalid_argument("max_node_size must be >= 1");
  }
};

inline double intensity_threshold(const HardwareProfile& hw, LinkClass l) {
  const auto i = static_cast<std::size_t>(l);
  if (i >= kLinkCount) throw std::invalid_argument("unknown link class");
  const double b = hw.bandwidth[i];
  if (!(b > 0.0)) throw std::invalid_argument("link has no bandwidth");
  return hw.c_gpu / b;
}

inline HardwareProfile default_a100_profile() {
  HardwareProfile hw;
  hw.name = "a100-80g-ib";
  hw.c_gpu = 312e12;
  hw.m_gpu = 80.0 * kGiB;
  const std::array<double, kLinkCount> gbs = {2039, 600, 63, 50, 31.5, 6.25, 3.2, 0.1};
  for (std::size_t i = 0; i < kLinkCount; ++i) hw.bandwidth[i] = gbs[i] * kGiB;
  return hw;
}

inline HardwareProfile ethernet_variant(HardwareProfile hw = default_a100_profile()) {
  hw.name = "a100-80g-ethernet";
  hw.inter_node = LinkClass::Ethernet;
  return hw;
}

inline HardwareProfile unlimited_node_variant(HardwareProfile hw = default_a100_profile()) {
  hw.name = "a100-80g-unlimited-node";
  hw.max_node_size = kUnbounded;
  hw.gpus_per_node = kUnbounded;
  return hw;
}

// Compute-only limit for schedule studies.
inline HardwareProfile ideal_network_profile(HardwareProfile hw = default_a100_profile()) {
  hw.name = "ideal";
  hw.bandwidth.fill(std::numeric_limits<double>::infinity());
  return hw;
}

inline HardwareProfile builtin_profile(std::string_view name) {
  if (name == "a100-80g-ib") return default_a100_profile();
  if (name == "a100-80g-ethernet") return ethernet_variant();
  if (name == "a100-80g-unlimited-node") return unlimited_node_variant();
  if (name == "ideal") return ideal_network_profile();
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

}  // namespace parascope

#endif  // PARASCOPE_HARDWARE_MODEL_HPP
