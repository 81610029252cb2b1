import { describe, expect, it } from "vitest";
import { Handlers, SocketLike, StudioClient } from "../src/client.js";
import { msg } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }
}

function connect(handlers: Handlers = {}): { client: StudioClient; sock: FakeSocket } {
  const sock = new FakeSocket();
  const client = new StudioClient("ws://test/ws", handlers, () => sock);
  sock.onopen?.();
  return { client, sock };
}

function snapshotJson(tick: number): string {
  return JSON.stringify({
    v: 1,
    type: "snapshot",
    tick,
    mode: "running",
    robot: { pos: [0, 0], vel: [0, 0], heading: 0 },
    humans: [],
    door_open: false,
    action: "GoAlone",
    trace: null,
  });
}

describe("connection state", () => {
  it("reports open and closed transitions", () => {
    const states: string[] = [];
    const { sock } = connect({ conn: (s) => states.push(s) });
    sock.onclose?.();
    expect(states).toEqual(["open", "closed"]);
  });

  it("refuses to send before the socket opens", () => {
    const errors: string[] = [];
    const sock = new FakeSocket();
    const client = new StudioClient("ws://test/ws", { protocolError: (e) => errors.push(e.message) }, () => sock);
    client.send(msg.pause());
    expect(sock.sent).toEqual([]);
    expect(errors).toHaveLength(1);
  });
});

describe("inbound routing", () => {
  it("queues snapshots instead of dispatching them", () => {
    const { client, sock } = connect();
    sock.onmessage?.({ data: snapshotJson(1) });
    sock.onmessage?.({ data: snapshotJson(2) });
    expect(client.frames.size).toBe(2);
    expect(client.frames.drainLatest()?.tick).toBe(2);
  });

  it("sheds the oldest frames when the tab cannot keep up", () => {
    const { client, sock } = connect();
    for (let t = 0; t < 500; t++) sock.onmessage?.({ data: snapshotJson(t) });
    expect(client.frames.size).toBe(client.frames.capacity);
    expect(client.frames.shift()?.tick).toBe(500 - client.frames.capacity);
  });

  it("routes non-frame messages to their handlers", () => {
    const got: string[] = [];
    const { sock } = connect({
      mode: (m) => got.push(`mode:${m}`),
      saved: (p, c) => got.push(`saved:${p}:${c}`),
      policy: (t) => got.push(`policy:${t}`),
      serverError: (code) => got.push(`err:${code}`),
    });
    sock.onmessage?.({ data: JSON.stringify({ v: 1, type: "mode", mode: "paused" }) });
    sock.onmessage?.({ data: JSON.stringify({ v: 1, type: "saved", path: "d.json", count: 4 }) });
    sock.onmessage?.({ data: JSON.stringify({ v: 1, type: "policy", text: "p" }) });
    sock.onmessage?.({ data: JSON.stringify({ v: 1, type: "error", code: "nope", message: "m" }) });
    expect(got).toEqual(["mode:paused", "saved:d.json:4", "policy:p", "err:nope"]);
  });

  it("surfaces invalid traffic without dispatching it", () => {
    const errors: unknown[] = [];
    const modes: string[] = [];
    const { sock } = connect({
      protocolError: (e) => errors.push(e),
      mode: (m) => modes.push(m),
    });
    sock.onmessage?.({ data: JSON.stringify({ v: 9, type: "mode", mode: "paused" }) });
    sock.onmessage?.({ data: "garbage" });
    expect(errors).toHaveLength(2);
    expect(modes).toEqual([]);
  });
});

describe("outbound", () => {
  it("sends encoder-built messages verbatim", () => {
    const { client, sock } = connect();
    client.send(msg.rewind(10));
    client.send(msg.labelTransition("Halt"));
    expect(sock.sent.map((s) => JSON.parse(s))).toEqual([
      { v: 1, type: "rewind", n: 10 },
      { v: 1, type: "label_transition", action: "Halt" },
    ]);
  });

  it("close closes the socket", () => {
    const { client, sock } = connect();
    client.close();
    expect(sock.closed).toBe(true);
  });
});
