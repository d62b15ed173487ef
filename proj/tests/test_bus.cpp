#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "drivebridge/bus.hpp"
#include "oracles.hpp"

using namespace drivebridge;
using namespace drivebridge::bus;

namespace {

SetSpeedMsg speed(double v) { return SetSpeedMsg{v, 0.0}; }

double speed_of(const MessageEnvelope& env) { return std::get<SetSpeedMsg>(env.payload).speed; }

}  // namespace

TEST(TopicName, AcceptsSlashPaths) {
  EXPECT_EQ(TopicName("/detections").str(), "/detections");
  EXPECT_EQ(TopicName("/a/b").str(), "/a/b");
}

TEST(TopicName, RejectsMalformedPaths) {
  EXPECT_THROW(TopicName(""), std::invalid_argument);
  EXPECT_THROW(TopicName("/"), std::invalid_argument);
  EXPECT_THROW(TopicName("detections"), std::invalid_argument);
  EXPECT_THROW(TopicName("/with space"), std::invalid_argument);
}

TEST(BusRegistry, FirstPublisherRegistration) {
  Bus bus;
  bus.register_publisher("perception", TopicName("/detections"));
  const auto rec = bus.lookup(TopicName("/detections"));
  EXPECT_EQ(rec.publishers, (std::set<NodeId>{"perception"}));
  EXPECT_TRUE(rec.subscribers.empty());
}

TEST(BusRegistry, RegistrationIsIdempotent) {
  Bus bus;
  const auto a = bus.register_publisher("perception", TopicName("/detections"));
  const auto b = bus.register_publisher("perception", TopicName("/detections"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(bus.lookup(TopicName("/detections")).publishers.size(), 1u);

  const auto s1 = bus.register_subscriber("ctrl", TopicName("/detections"), 4);
  const auto s2 = bus.register_subscriber("ctrl", TopicName("/detections"), 9);
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(bus.capacity(s1), 4u);
}

TEST(BusRegistry, TwoPublishersOnOneTopic) {
  Bus bus;
  bus.register_publisher("ctrl", TopicName("/cmd"));
  bus.register_publisher("ctrl2", TopicName("/cmd"));
  EXPECT_EQ(bus.lookup(TopicName("/cmd")).publishers, (std::set<NodeId>{"ctrl", "ctrl2"}));
}

TEST(BusRegistry, UnknownTopicIsEmpty) {
  Bus bus;
  EXPECT_EQ(bus.lookup(TopicName("/nothing")), RegistryRecord{});
}

TEST(BusRegistry, OnePublisherTwoSubscribers) {
  Bus bus;
  bus.register_publisher("p", TopicName("/t"));
  bus.register_subscriber("s1", TopicName("/t"));
  bus.register_subscriber("s2", TopicName("/t"));
  const auto rec = bus.lookup(TopicName("/t"));
  EXPECT_EQ(rec.publishers.size(), 1u);
  EXPECT_EQ(rec.subscribers.size(), 2u);
}

TEST(BusRegistry, ShutdownRemovesNodeAndInvalidatesHandles) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  const auto sub = bus.register_subscriber("s", TopicName("/t"));
  bus.register_subscriber("p", TopicName("/u"));
  bus.shutdown_node("p");
  EXPECT_TRUE(bus.lookup(TopicName("/t")).publishers.empty());
  EXPECT_TRUE(bus.lookup(TopicName("/u")).subscribers.empty());
  EXPECT_EQ(bus.lookup(TopicName("/t")).subscribers, (std::set<NodeId>{"s"}));
  EXPECT_THROW(bus.publish(pub, speed(1), 0.0), std::invalid_argument);
  EXPECT_EQ(bus.pending(sub), 0u);
}

TEST(BusRegistry, ZeroCapacityRejected) {
  Bus bus;
  EXPECT_THROW(bus.register_subscriber("s", TopicName("/t"), 0), std::invalid_argument);
}

TEST(BusRegistry, MatchesModelOnRandomSequences) {
  const std::vector<std::string> nodes{"a", "b", "c", "d"};
  const std::vector<std::string> names{"/x", "/y", "/z"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> op(0, 9);
    std::uniform_int_distribution<std::size_t> pick_node(0, nodes.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_topic(0, names.size() - 1);
    Bus bus;
    oracle::RegistryModel model;
    for (int step = 0; step < 40; ++step) {
      const auto& node = nodes[pick_node(rng)];
      const auto& topic = names[pick_topic(rng)];
      const int o = op(rng);
      if (o < 4) {
        bus.register_publisher(node, TopicName(topic));
        model.add_publisher(node, topic);
      } else if (o < 8) {
        bus.register_subscriber(node, TopicName(topic));
        model.add_subscriber(node, topic);
      } else {
        bus.shutdown_node(node);
        model.shutdown(node);
      }
      for (const auto& t : names) {
        const auto rec = bus.lookup(TopicName(t));
        const auto& expected = model.topics[t];
        ASSERT_EQ(rec.publishers, expected.first) << "seed " << seed << " step " << step;
        ASSERT_EQ(rec.subscribers, expected.second) << "seed " << seed << " step " << step;
      }
    }
  }
}

TEST(BusDelivery, FifoInSeqOrder) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  const auto sub = bus.register_subscriber("s", TopicName("/t"));
  for (int i = 0; i < 3; ++i) bus.publish(pub, speed(i), 0.1 * i);
  const auto got = bus.drain(sub);
  ASSERT_EQ(got.size(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) {
    EXPECT_EQ(got[i].seq, i);
    EXPECT_EQ(got[i].publisher, "p");
  }
}

TEST(BusDelivery, FirstSeqIsZero) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  EXPECT_EQ(bus.publish(pub, speed(1), 0.0).seq, 0u);
}

TEST(BusDelivery, NoReplayForLateSubscribers) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  bus.publish(pub, speed(1), 0.0);
  const auto sub = bus.register_subscriber("s", TopicName("/t"));
  bus.publish(pub, speed(2), 0.1);
  const auto got = bus.drain(sub);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(speed_of(got[0]), 2.0);
}

TEST(BusDelivery, HundredPublishesAllArrive) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  const auto sub = bus.register_subscriber("s", TopicName("/t"), 128);
  for (int i = 0; i < 100; ++i) bus.publish(pub, speed(i), 0.0);
  const auto got = bus.drain(sub);
  ASSERT_EQ(got.size(), 100u);
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(got[i].seq, i);
  EXPECT_EQ(bus.dropped(sub), 0u);
}

TEST(BusDelivery, InterleavedPublishersKeepCallOrder) {
  Bus bus;
  const auto a = bus.register_publisher("a", TopicName("/t"));
  const auto b = bus.register_publisher("b", TopicName("/t"));
  const auto sub = bus.register_subscriber("s", TopicName("/t"), 64);
  std::vector<std::pair<std::string, std::uint64_t>> log;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const bool use_a = rng() % 2 == 0;
    const auto env = bus.publish(use_a ? a : b, speed(i), 0.0);
    log.emplace_back(env.publisher, env.seq);
  }
  const auto got = bus.drain(sub);
  ASSERT_EQ(got.size(), log.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].publisher, log[i].first);
    EXPECT_EQ(got[i].seq, log[i].second);
  }
}

TEST(BusDelivery, CapacityTwoDropsOldest) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  const auto sub = bus.register_subscriber("s", TopicName("/t"), 2);
  for (int i = 0; i < 3; ++i) bus.publish(pub, speed(i), 0.0);
  EXPECT_EQ(bus.dropped(sub), 1u);
  const auto got = bus.drain(sub);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].seq, 1u);
  EXPECT_EQ(got[1].seq, 2u);
}

TEST(BusDelivery, RingBufferMatchesModel) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t cap = 1 + rng() % 8;
    Bus bus;
    const auto pub = bus.register_publisher("p", TopicName("/t"));
    const auto sub = bus.register_subscriber("s", TopicName("/t"), cap);
    oracle::DropOldestQueue<std::uint64_t> model{cap, {}, 0};
    for (int step = 0; step < 200; ++step) {
      const auto r = rng() % 10;
      if (r < 6) {
        model.push(bus.publish(pub, speed(step), 0.0).seq);
      } else if (r < 8) {
        const auto env = bus.take(sub);
        ASSERT_EQ(env.has_value(), !model.items.empty());
        if (env) {
          EXPECT_EQ(env->seq, model.items.front());
          model.items.pop_front();
        }
      } else {
        const auto all = bus.drain(sub);
        ASSERT_EQ(all.size(), model.items.size());
        for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].seq, model.items[i]);
        model.items.clear();
      }
      ASSERT_EQ(bus.pending(sub), model.items.size());
      ASSERT_EQ(bus.dropped(sub), model.dropped);
    }
  }
}

TEST(BusDelivery, ClockRegressionRejected) {
  Bus bus;
  const auto pub = bus.register_publisher("p", TopicName("/t"));
  bus.publish(pub, speed(1), 1.0);
  EXPECT_NO_THROW(bus.publish(pub, speed(1), 1.0));
  EXPECT_THROW(bus.publish(pub, speed(1), 0.5), std::invalid_argument);
}

TEST(BusDelivery, UnknownHandlesRejected) {
  Bus bus;
  EXPECT_THROW(bus.publish(PublisherHandle{42}, speed(1), 0.0), std::invalid_argument);
  EXPECT_THROW(bus.drain(SubscriptionHandle{42}), std::invalid_argument);
}

TEST(BusDelivery, ConcurrentPublishersLoseNothing) {
  Bus bus;
  const auto sub = bus.register_subscriber("s", TopicName("/t"), 4000);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&bus, t] {
      const auto pub = bus.register_publisher("p" + std::to_string(t), TopicName("/t"));
      for (int i = 0; i < 1000; ++i) bus.publish(pub, speed(i), 0.0);
    });
  }
  for (auto& th : threads) th.join();
  const auto got = bus.drain(sub);
  ASSERT_EQ(got.size(), 4000u);
  std::map<std::string, std::uint64_t> next;
  for (const auto& env : got) {
    EXPECT_EQ(env.seq, next[env.publisher]++);
  }
}
