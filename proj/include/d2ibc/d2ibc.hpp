#pragma once

#include "certify.hpp"
#include "errors.hpp"
#include "golden.hpp"
#include "nic.hpp"
#include "record_io.hpp"
#include "signals.hpp"
#include "simloop.hpp"
#include "sysid.hpp"
#include "vrft.hpp"
