#ifndef WORMGAIT_WORMGAIT_HPP
#define WORMGAIT_WORMGAIT_HPP

#include "wormgait/actuation.hpp"
#include "wormgait/energy.hpp"
#include "wormgait/errors.hpp"
#include "wormgait/identification.hpp"
#include "wormgait/locomotion.hpp"
#include "wormgait/model.hpp"
#include "wormgait/nsga2.hpp"
#include "wormgait/optimizer.hpp"

#endif
