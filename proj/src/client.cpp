#include "blueice/client.hpp"

#include "blueice/canonical.hpp"

namespace blueice {

Tick run_federate(const ClientOptions& options, FederateLogic& logic) {
    Socket socket = connect_to(options.address);
    LineReader reader(socket, options.max_record_bytes);
    frame_write(socket, make_hello(options.id, options.token));

    Envelope welcome = frame_read(reader);
    if (welcome.kind == Kind::Error) throw ProtocolError(welcome.error_code, "join refused: " + welcome.error_code);
    if (welcome.kind != Kind::Welcome) throw ProtocolError("BAD_MSG", "expected WELCOME");
    logic.on_welcome(welcome.payload);

    SeqCounter seq;
    std::vector<Envelope> deliveries;
    Tick completed = 0;
    while (true) {
        Envelope e = frame_read(reader);
        switch (e.kind) {
            case Kind::Deliver:
                deliveries.push_back(std::move(e));
                break;
            case Kind::Tick: {
                const Tick tick = e.tick;
                auto pubs = logic.on_tick(tick, deliveries);
                deliveries.clear();
                std::string batch;
                for (auto& p : pubs) {
                    batch += canonical_encode(make_pub(options.id, tick, std::move(p.topic), seq.next(p.seq),
                                                       std::move(p.payload)));
                }
                batch += canonical_encode(make_tick_done(options.id, tick));
                socket.write_all(batch);
                completed = tick + 1;
                break;
            }
            case Kind::Bye:
                return completed;
            case Kind::Error:
                if (is_fatal_error(e)) throw ProtocolError(e.error_code, "coordinator error: " + e.error_code);
                logic.on_error(e);
                break;
            default:
                throw ProtocolError("BAD_MSG", "unexpected " + std::string(to_string(e.kind)) + " from coordinator");
        }
    }
}

}  // namespace blueice
