from ipaddress import IPv4Address

import dpkt

from analysis.pcap import PacketRecord

ATTACKER = IPv4Address('10.0.5.2')
TARGET = IPv4Address('10.0.9.2')


def make_record(t_us, protocol=dpkt.ip.IP_PROTO_UDP, size=96, dst_port=53, src=ATTACKER, dst=TARGET,
                flags=0, capture='T__CN0-to-CN1__cap.pcap'):
    if protocol == dpkt.ip.IP_PROTO_TCP and flags == 0:
        flags = dpkt.tcp.TH_SYN
    return PacketRecord(
        ts_us=t_us, capture=capture, frame_len=size + 14, ip_len=size, protocol=protocol,
        src=IPv4Address(src), dst=IPv4Address(dst), src_port=40000, dst_port=dst_port, flags=flags,
    )


def benign_record(t_us, size=1500):
    return make_record(t_us, dpkt.ip.IP_PROTO_TCP, size, dst_port=49152, flags=dpkt.tcp.TH_ACK)
