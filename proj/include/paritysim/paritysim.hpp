#pragma once
// Umbrella header for the parity-stabilization simulator.

#include "paritysim/config.hpp"
#include "paritysim/device.hpp"
#include "paritysim/engine.hpp"
#include "paritysim/oracle.hpp"
#include "paritysim/protocol.hpp"
#include "paritysim/qops.hpp"
#include "paritysim/run.hpp"
#include "paritysim/schedule.hpp"
#include "paritysim/tomography.hpp"
