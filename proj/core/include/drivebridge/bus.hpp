#pragma once

// In-process publish/subscribe middleware.
//
// A Bus owns a registry mapping topic names to the nodes that publish or
// subscribe on them. The registry only handles discovery; publishing hands the
// envelope straight to each subscriber's bounded queue before returning, so
// there are no background threads and no callbacks into user code.
//
// Queues drop their oldest message on overflow and count the drop. Messages
// published before a subscription exists are never replayed.

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "drivebridge/messages.hpp"

namespace drivebridge::bus {

/// Slash-separated topic path, e.g. "/weather_control".
class TopicName {
 public:
  /// Throws std::invalid_argument unless `path` starts with '/', has more than
  /// one character and contains no whitespace.
  explicit TopicName(std::string path);

  const std::string& str() const { return path_; }

  auto operator<=>(const TopicName&) const = default;

 private:
  std::string path_;
};

bool is_valid_topic(std::string_view path);

using NodeId = std::string;

namespace topics {
inline const char* const kDetections = "/detections";
inline const char* const kAckermannCmd = "/ackermann_cmd";
inline const char* const kVehicleState = "/vehicle_state";
inline const char* const kWeatherControl = "/weather_control";
inline const char* const kSetSpeed = "/set_speed";
}  // namespace topics

inline constexpr std::size_t kDefaultQueueCapacity = 16;

struct MessageEnvelope {
  TopicName topic;
  NodeId publisher;
  std::uint64_t seq = 0;
  double publish_time = 0.0;
  Payload payload;

  bool operator==(const MessageEnvelope&) const = default;
};

struct RegistryRecord {
  std::set<NodeId> publishers;
  std::set<NodeId> subscribers;

  bool operator==(const RegistryRecord&) const = default;
};

struct PublisherHandle {
  std::uint64_t id = 0;
  auto operator<=>(const PublisherHandle&) const = default;
};

struct SubscriptionHandle {
  std::uint64_t id = 0;
  auto operator<=>(const SubscriptionHandle&) const = default;
};

class Bus {
 public:
  Bus() = default;
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  /// Registering the same (node, topic) pair again returns the original handle.
  PublisherHandle register_publisher(const NodeId& node, const TopicName& topic);

  /// Throws std::invalid_argument when capacity is 0. Re-registering an
  /// existing (node, topic) subscription returns the original handle and keeps
  /// its original capacity.
  SubscriptionHandle register_subscriber(const NodeId& node, const TopicName& topic,
                                         std::size_t queue_capacity = kDefaultQueueCapacity);

  /// Stamps the next sequence number and copies the envelope into every current
  /// subscriber queue of the topic. Throws std::invalid_argument for an unknown
  /// handle or when `now` is earlier than this publisher's previous publish.
  MessageEnvelope publish(PublisherHandle handle, Payload payload, double now);

  /// Current registrations for `topic`; empty for unknown topics.
  RegistryRecord lookup(const TopicName& topic) const;

  std::vector<TopicName> topics() const;

  /// Removes every registration held by `node`. Its handles become invalid.
  void shutdown_node(const NodeId& node);

  /// Pops all queued messages in arrival order.
  std::vector<MessageEnvelope> drain(SubscriptionHandle handle);

  /// Pops the oldest queued message, if any.
  std::optional<MessageEnvelope> take(SubscriptionHandle handle);

  std::size_t pending(SubscriptionHandle handle) const;
  std::uint64_t dropped(SubscriptionHandle handle) const;
  std::size_t capacity(SubscriptionHandle handle) const;

 private:
  struct Publisher {
    NodeId node;
    TopicName topic;
    std::uint64_t next_seq = 0;
    std::optional<double> last_publish_time;
  };

  // Fixed-capacity ring buffer of envelopes.
  struct Subscription {
    NodeId node;
    TopicName topic;
    std::vector<std::optional<MessageEnvelope>> ring;
    std::size_t head = 0;
    std::size_t size = 0;
    std::uint64_t dropped = 0;

    void push(const MessageEnvelope& env);
    std::optional<MessageEnvelope> pop();
  };

  struct TopicEntry {
    std::map<NodeId, std::uint64_t> publishers;
    std::map<NodeId, std::uint64_t> subscribers;
  };

  const Subscription& subscription(SubscriptionHandle handle) const;
  Subscription& subscription(SubscriptionHandle handle);

  mutable std::mutex mutex_;
  std::uint64_t next_handle_ = 1;
  std::map<TopicName, TopicEntry> registry_;
  std::map<std::uint64_t, Publisher> publishers_;
  std::map<std::uint64_t, Subscription> subscriptions_;
};

}  // namespace drivebridge::bus
