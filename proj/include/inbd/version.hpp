#ifndef INBD_VERSION_HPP
#define INBD_VERSION_HPP

#define INBD_VERSION "0.1.0"

#endif
