#pragma once

#include "aesthetic/error.hpp"
#include "aesthetic/imaging.hpp"
#include "aesthetic/light.hpp"
#include "aesthetic/color.hpp"
#include "aesthetic/geometry.hpp"
#include "aesthetic/perception.hpp"
#include "aesthetic/composition.hpp"
#include "aesthetic/features.hpp"
#include "aesthetic/metrics.hpp"
#include "aesthetic/netnum.hpp"
#include "aesthetic/fusion.hpp"
#include "aesthetic/dataset.hpp"
#include "aesthetic/config.hpp"
#include "aesthetic/commands.hpp"
