#pragma once

#include "qpvi/connection.hpp"
#include "qpvi/dynamics.hpp"
#include "qpvi/errors.hpp"
#include "qpvi/lax.hpp"
#include "qpvi/qspecial.hpp"
#include "qpvi/specialsol.hpp"
#include "qpvi/surface.hpp"
#include "qpvi/types.hpp"
