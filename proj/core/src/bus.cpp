#include "drivebridge/bus.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <utility>

namespace drivebridge::bus {

bool is_valid_topic(std::string_view path) {
  if (path.size() < 2 || path.front() != '/') return false;
  return std::none_of(path.begin(), path.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; });
}

TopicName::TopicName(std::string path) : path_(std::move(path)) {
  if (!is_valid_topic(path_)) {
    throw std::invalid_argument("invalid topic name '" + path_ + "'");
  }
}

void Bus::Subscription::push(const MessageEnvelope& env) {
  const std::size_t cap = ring.size();
  if (size == cap) {
    ring[head].reset();
    head = (head + 1) % cap;
    --size;
    ++dropped;
  }
  ring[(head + size) % cap] = env;
  ++size;
}

std::optional<MessageEnvelope> Bus::Subscription::pop() {
  if (size == 0) return std::nullopt;
  std::optional<MessageEnvelope> out = std::move(ring[head]);
  ring[head].reset();
  head = (head + 1) % ring.size();
  --size;
  return out;
}

PublisherHandle Bus::register_publisher(const NodeId& node, const TopicName& topic) {
  std::lock_guard lock(mutex_);
  auto& entry = registry_[topic];
  if (auto it = entry.publishers.find(node); it != entry.publishers.end()) {
    return PublisherHandle{it->second};
  }
  const std::uint64_t id = next_handle_++;
  publishers_.emplace(id, Publisher{node, topic, 0, std::nullopt});
  entry.publishers.emplace(node, id);
  return PublisherHandle{id};
}

SubscriptionHandle Bus::register_subscriber(const NodeId& node, const TopicName& topic,
                                            std::size_t queue_capacity) {
  if (queue_capacity == 0) {
    throw std::invalid_argument("subscription queue capacity must be >= 1");
  }
  std::lock_guard lock(mutex_);
  auto& entry = registry_[topic];
  if (auto it = entry.subscribers.find(node); it != entry.subscribers.end()) {
    return SubscriptionHandle{it->second};
  }
  const std::uint64_t id = next_handle_++;
  Subscription sub{node, topic, {}, 0, 0, 0};
  sub.ring.resize(queue_capacity);
  subscriptions_.emplace(id, std::move(sub));
  entry.subscribers.emplace(node, id);
  return SubscriptionHandle{id};
}

MessageEnvelope Bus::publish(PublisherHandle handle, Payload payload, double now) {
  std::lock_guard lock(mutex_);
  auto it = publishers_.find(handle.id);
  if (it == publishers_.end()) {
    throw std::invalid_argument("unknown publisher handle");
  }
  Publisher& pub = it->second;
  if (pub.last_publish_time && now < *pub.last_publish_time) {
    throw std::invalid_argument("publish clock regression on " + pub.topic.str());
  }
  MessageEnvelope env{pub.topic, pub.node, pub.next_seq, now, std::move(payload)};
  ++pub.next_seq;
  pub.last_publish_time = now;

  for (const auto& [node, sub_id] : registry_.at(pub.topic).subscribers) {
    subscriptions_.at(sub_id).push(env);
  }
  return env;
}

RegistryRecord Bus::lookup(const TopicName& topic) const {
  std::lock_guard lock(mutex_);
  RegistryRecord rec;
  auto it = registry_.find(topic);
  if (it == registry_.end()) return rec;
  for (const auto& [node, id] : it->second.publishers) rec.publishers.insert(node);
  for (const auto& [node, id] : it->second.subscribers) rec.subscribers.insert(node);
  return rec;
}

std::vector<TopicName> Bus::topics() const {
  std::lock_guard lock(mutex_);
  std::vector<TopicName> out;
  for (const auto& [topic, entry] : registry_) {
    if (!entry.publishers.empty() || !entry.subscribers.empty()) out.push_back(topic);
  }
  return out;
}

void Bus::shutdown_node(const NodeId& node) {
  std::lock_guard lock(mutex_);
  for (auto& [topic, entry] : registry_) {
    if (auto it = entry.publishers.find(node); it != entry.publishers.end()) {
      publishers_.erase(it->second);
      entry.publishers.erase(it);
    }
    if (auto it = entry.subscribers.find(node); it != entry.subscribers.end()) {
      subscriptions_.erase(it->second);
      entry.subscribers.erase(it);
    }
  }
}

const Bus::Subscription& Bus::subscription(SubscriptionHandle handle) const {
  auto it = subscriptions_.find(handle.id);
  if (it == subscriptions_.end()) {
    throw std::invalid_argument("unknown subscription handle");
  }
  return it->second;
}

Bus::Subscription& Bus::subscription(SubscriptionHandle handle) {
  return const_cast<Subscription&>(std::as_const(*this).subscription(handle));
}

std::vector<MessageEnvelope> Bus::drain(SubscriptionHandle handle) {
  std::lock_guard lock(mutex_);
  Subscription& sub = subscription(handle);
  std::vector<MessageEnvelope> out;
  out.reserve(sub.size);
  while (auto env = sub.pop()) out.push_back(std::move(*env));
  return out;
}

std::optional<MessageEnvelope> Bus::take(SubscriptionHandle handle) {
  std::lock_guard lock(mutex_);
  return subscription(handle).pop();
}

std::size_t Bus::pending(SubscriptionHandle handle) const {
  std::lock_guard lock(mutex_);
  return subscription(handle).size;
}

std::uint64_t Bus::dropped(SubscriptionHandle handle) const {
  std::lock_guard lock(mutex_);
  return subscription(handle).dropped;
}

std::size_t Bus::capacity(SubscriptionHandle handle) const {
  std::lock_guard lock(mutex_);
  return subscription(handle).ring.size();
}

}  // namespace drivebridge::bus
