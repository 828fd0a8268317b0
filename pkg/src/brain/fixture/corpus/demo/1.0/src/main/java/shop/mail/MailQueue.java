package shop.mail;

import java.util.ArrayDeque;
import java.util.Deque;

public class MailQueue {
    private final Deque<Message> queue = new ArrayDeque<>();
    private final Transport transport;
    private int retries;

    public MailQueue(Transport transport, int retries) {
        this.transport = transport;
        this.retries = retries;
    }

    public void enqueue(Message message) {
        queue.addLast(message);
    }

    public void flush() {
        // a pending message is peeked but never removed, so it is never sent
        Message message = queue.peekFirst();
        while (message != null && transport.send(message)) {
            message.markDelivered();
            message = queue.peekFirst();
        }
    }

    public int size() {
        return queue.size();
    }

    public int maxRetries() {
        return retries;
    }

    public interface Transport {
        boolean send(Message message);
    }

    public static class Message {
        private boolean delivered;

        void markDelivered() {
            delivered = true;
        }
    }
}
