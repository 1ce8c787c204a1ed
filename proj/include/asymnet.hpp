#pragma once

// Everything in one include.
#include "asymnet/backend/backend.hpp"
#include "asymnet/backend/bootstrap.hpp"
#include "asymnet/backend/buffer_pool.hpp"
#include "asymnet/backend/data_pump.hpp"
#include "asymnet/backend/event_builder.hpp"
#include "asymnet/backend/fanout.hpp"
#include "asymnet/backend/packet_mover.hpp"
#include "asymnet/backend/trigger_unit.hpp"
#include "asymnet/core/bits.hpp"
#include "asymnet/core/errors.hpp"
#include "asymnet/core/time.hpp"
#include "asymnet/frontend/card.hpp"
#include "asymnet/frontend/event_generator.hpp"
#include "asymnet/frontend/registers.hpp"
#include "asymnet/msg/channel_a.hpp"
#include "asymnet/msg/channel_b.hpp"
#include "asymnet/msg/channel_c.hpp"
#include "asymnet/msg/crc32.hpp"
#include "asymnet/msg/fragment.hpp"
#include "asymnet/msg/frame_parser.hpp"
#include "asymnet/msg/framing.hpp"
#include "asymnet/sim/ber.hpp"
#include "asymnet/sim/config.hpp"
#include "asymnet/sim/link_timing.hpp"
#include "asymnet/sim/metrics.hpp"
#include "asymnet/sim/scheduler.hpp"
#include "asymnet/sim/simulator.hpp"
#include "asymnet/sim/vectors.hpp"
#include "asymnet/transport/client.hpp"
#include "asymnet/transport/frame.hpp"
#include "asymnet/transport/model.hpp"
#include "asymnet/transport/server.hpp"
#include "asymnet/transport/udp_loopback.hpp"
#include "asymnet/wire/chains.hpp"
#include "asymnet/wire/gf2.hpp"
#include "asymnet/wire/line_sync.hpp"
#include "asymnet/wire/manchester.hpp"
#include "asymnet/wire/prbs.hpp"
#include "asymnet/wire/scrambler.hpp"
#include "asymnet/wire/tdm.hpp"
